#pragma once

#include <functional>
#include <string>
#include <variant>

#include "dirac/clifford.hpp"

namespace dirac {

/// R^n / Lambda with the Euclidean metric. Columns of `latticeBasis` generate
/// Lambda; `spinShift` (entries 0 or 1/2) is the spin character on the basis
/// translations: psi(x + b_k) = exp(2 pi i shift_k) psi(x).
struct FlatTorusModel {
    int n = 1;
    RMatrix latticeBasis = RMatrix::Identity(1, 1);
    RVector spinShift = RVector::Zero(1);

    RMatrix gram() const { return latticeBasis.transpose() * latticeBasis; }
    void validate() const;

    static FlatTorusModel circle(double length, double shift = 0.0);
    static FlatTorusModel cube(int n, double side, const RVector& shift);
};

/// Mapping torus of an affine map of a flat torus fiber over a circle of
/// length L, with fiber metric scaled by eps^2 and a constant horizontal
/// connection A.
///
/// Coordinates (theta, y) with y in lattice coordinates of the fiber. Sections
/// satisfy psi(theta, y + k) = exp(2 pi i delta.k) psi and
/// psi(theta + L, phi y) = exp(2 pi i baseShift) U psi(theta, y), where U is
/// `holonomyLift`. Gamma index 0 is the base direction, 1..m the fiber frame.
struct AffineMappingTorus {
    FlatTorusModel fiber;
    Eigen::MatrixXi holonomyMatrix = Eigen::MatrixXi::Identity(1, 1);
    CMatrix holonomyLift;  // empty means identity
    double baseLength = 2.0 * kPi;
    double baseSpinShift = 0.0;
    RVector connectionForm = RVector::Zero(1);
    double fiberScale = 1.0;

    int fiberDim() const { return fiber.n; }
    int dimension() const { return fiber.n + 1; }

    /// Fiber Gram matrix at eps = 1.
    RMatrix fiberGram() const { return fiber.gram(); }

    /// Monodromy in the orthonormal fiber frame, O = G^{1/2} phi G^{-1/2}.
    RMatrix frameRotation() const;

    /// Order of phi in GL(m, Z); throws if it exceeds `cap`.
    int holonomyOrder(int cap = 64) const;

    /// Lift on V, identity when `holonomyLift` is empty.
    CMatrix lift(int dimV) const;

    /// Full validation against a module of dimension fiberDim() + 1: metric
    /// preservation, finite order, phi A = A, spin compatibility and
    /// Clifford equivariance of the lift.
    void validate(const CliffordModule& cm) const;

    AffineMappingTorus withScale(double eps) const {
        AffineMappingTorus copy = *this;
        copy.fiberScale = eps;
        return copy;
    }
};

using BundleModel = std::variant<FlatTorusModel, AffineMappingTorus>;

/// Geometric data in the chosen orthonormal frame. `omega` stores the
/// connection coefficients omega_{abj} (n^3 entries), `riemann` R_{abij}
/// (n^4 entries); both vanish on the flat models.
struct GeometricData {
    int n = 0;
    std::vector<double> omega;
    std::vector<double> riemann;
    double normR = 0.0;
    double normPi = 0.0;
    double normT = 0.0;
    double diamZ = 0.0;

    double omegaAt(int a, int b, int j) const {
        return omega[static_cast<std::size_t>((a * n + b) * n + j)];
    }
    double riemannAt(int a, int b, int i, int j) const {
        return riemann[static_cast<std::size_t>(((a * n + b) * n + i) * n + j)];
    }
};

/// Intrinsic diameter of R^n / Lambda. Exact for rectangular lattices,
/// otherwise maximized over a grid of `resolution` points per dimension.
double torus_diameter(const FlatTorusModel& torus, int resolution = 64);

GeometricData geometric_data(const FlatTorusModel& model, int resolution = 64);
GeometricData geometric_data(const AffineMappingTorus& model, int resolution = 64);

/// Constants of the spectral window; non-explicit in theory, configurable here.
struct WindowConstants {
    double A = kPi * kPi;
    double C = 10.0;
};

/// (A diam^-2 - C (|R| + |Pi|^2 + |T|^2))^{1/2}, clamped at zero.
double window_bound(const GeometricData& geo, const WindowConstants& k = {});

using GramFamily = std::function<RMatrix(double)>;

/// ||c'(t)||_{c(t)} = largest |eigenvalue| of c^{-1} c', with c' by central
/// differences of step `h`. Throws if c(t) is not positive definite.
double metric_speed(const GramFamily& family, double t, double h = 1e-5);

/// Path length l(c) = int_{t0}^{t1} ||c'(t)||_{c(t)} dt by composite Simpson
/// (trapezoid when the interval count is odd) over `samples` nodes.
double metric_path(const GramFamily& family, int samples, double t0 = 0.0, double t1 = 1.0);

}  // namespace dirac
