#include "dirac/geometry.hpp"

#include <cmath>
#include <limits>

namespace dirac {

namespace {

RMatrix sym_sqrt(const RMatrix& g, bool inverse) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(g);
    RVector d = es.eigenvalues();
    for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = inverse ? 1.0 / std::sqrt(d(k)) : std::sqrt(d(k));
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

bool is_half_integer_shift(double s) {
    return std::abs(s) < 1e-12 || std::abs(s - 0.5) < 1e-12;
}

double frac_distance(double x) { return std::abs(x - std::round(x)); }

}  // namespace

void FlatTorusModel::validate() const {
    if (n < 1) throw Error("FlatTorusModel: dimension must be positive");
    if (latticeBasis.rows() != n || latticeBasis.cols() != n)
        throw Error("FlatTorusModel: lattice basis must be n x n");
    if (spinShift.size() != n) throw Error("FlatTorusModel: spin shift must have n entries");
    if (std::abs(latticeBasis.determinant()) <= 1e-12)
        throw Error("FlatTorusModel: lattice basis is singular");
    for (Eigen::Index k = 0; k < n; ++k)
        if (!is_half_integer_shift(spinShift(k)))
            throw Error("FlatTorusModel: spin shift entries must be 0 or 1/2");
}

FlatTorusModel FlatTorusModel::circle(double length, double shift) {
    FlatTorusModel t;
    t.n = 1;
    t.latticeBasis = RMatrix::Constant(1, 1, length);
    t.spinShift = RVector::Constant(1, shift);
    return t;
}

FlatTorusModel FlatTorusModel::cube(int n, double side, const RVector& shift) {
    FlatTorusModel t;
    t.n = n;
    t.latticeBasis = side * RMatrix::Identity(n, n);
    t.spinShift = shift;
    return t;
}

RMatrix AffineMappingTorus::frameRotation() const {
    const RMatrix g = fiberGram();
    return sym_sqrt(g, false) * holonomyMatrix.cast<double>() * sym_sqrt(g, true);
}

int AffineMappingTorus::holonomyOrder(int cap) const {
    const Eigen::MatrixXi id = Eigen::MatrixXi::Identity(fiber.n, fiber.n);
    Eigen::MatrixXi power = holonomyMatrix;
    for (int k = 1; k <= cap; ++k) {
        if (power == id) return k;
        power = power * holonomyMatrix;
    }
    throw Error("AffineMappingTorus: holonomy matrix has infinite order (or order above " +
                std::to_string(cap) + ")");
}

CMatrix AffineMappingTorus::lift(int dimV) const {
    if (holonomyLift.size() == 0) return CMatrix::Identity(dimV, dimV);
    return holonomyLift;
}

void AffineMappingTorus::validate(const CliffordModule& cm) const {
    fiber.validate();
    const int m = fiber.n;
    if (cm.n != m + 1) throw Error("AffineMappingTorus: module dimension must be fiber dimension + 1");
    if (holonomyMatrix.rows() != m || holonomyMatrix.cols() != m)
        throw Error("AffineMappingTorus: holonomy matrix must be m x m");
    if (connectionForm.size() != m) throw Error("AffineMappingTorus: connection form must have m entries");
    if (!(baseLength > 0.0)) throw Error("AffineMappingTorus: base length must be positive");
    if (!(fiberScale > 0.0)) throw Error("AffineMappingTorus: fiber scale must be positive");
    if (!is_half_integer_shift(baseSpinShift))
        throw Error("AffineMappingTorus: base spin shift must be 0 or 1/2");

    const RMatrix phi = holonomyMatrix.cast<double>();
    const RMatrix g = fiberGram();
    if ((phi.transpose() * g * phi - g).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff()))
        throw Error("AffineMappingTorus: holonomy does not preserve the fiber metric");
    if (std::abs(std::abs(holonomyMatrix.cast<double>().determinant()) - 1.0) > 1e-9)
        throw Error("AffineMappingTorus: holonomy is not in GL(m, Z)");
    if (phi.determinant() < 0.0)
        throw Error("AffineMappingTorus: orientation-reversing holonomy is not supported");
    holonomyOrder();

    if ((phi * connectionForm - connectionForm).cwiseAbs().maxCoeff() > 1e-12)
        throw Error("AffineMappingTorus: holonomy must fix the connection form (phi A = A)");
    const RVector twisted = phi.transpose() * fiber.spinShift - fiber.spinShift;
    for (Eigen::Index k = 0; k < twisted.size(); ++k)
        if (frac_distance(twisted(k)) > 1e-12)
            throw Error("AffineMappingTorus: spin structure is not preserved by the holonomy");

    const CMatrix u = lift(cm.dimV);
    if (u.rows() != cm.dimV || u.cols() != cm.dimV) throw Error("AffineMappingTorus: lift has wrong shape");
    if (unitary_residual(u) > 1e-10) throw Error("AffineMappingTorus: lift is not unitary");
    const auto& gam = cm.gammas;
    if (max_abs(u * gam[0] * u.adjoint() - gam[0]) > 1e-10)
        throw Error("AffineMappingTorus: lift must commute with the base gamma matrix");
    const RMatrix o = frameRotation();
    for (int j = 0; j < m; ++j) {
        CMatrix rotated = CMatrix::Zero(cm.dimV, cm.dimV);
        for (int k = 0; k < m; ++k) rotated += o(k, j) * gam[static_cast<std::size_t>(k + 1)];
        if (max_abs(u * gam[static_cast<std::size_t>(j + 1)] * u.adjoint() - rotated) > 1e-10)
            throw Error("AffineMappingTorus: lift is not Clifford-equivariant for the monodromy");
    }
}

double torus_diameter(const FlatTorusModel& torus, int resolution) {
    torus.validate();
    const RMatrix g = torus.gram();
    const RMatrix off = g - RMatrix(g.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() <= 1e-14 * g.cwiseAbs().maxCoeff())
        return 0.5 * std::sqrt(g.trace());

    const int n = torus.n;
    // keep the grid below ~2e6 points in high dimension
    int res = resolution;
    while (n > 1 && std::pow(static_cast<double>(res), n) > 2e6) res /= 2;
    long long points = 1;
    for (int k = 0; k < n; ++k) points *= res;
    int shifts = 1;
    for (int k = 0; k < n; ++k) shifts *= 4;  // s_k in {-1, 0, 1, 2}

    double best = 0.0;
    RVector u(n), s(n);
    for (long long p = 0; p < points; ++p) {
        long long rem = p;
        for (int k = 0; k < n; ++k) {
            u(k) = static_cast<double>(rem % res) / res;
            rem /= res;
        }
        double nearest = std::numeric_limits<double>::infinity();
        for (int c = 0; c < shifts; ++c) {
            int cr = c;
            for (int k = 0; k < n; ++k) {
                s(k) = static_cast<double>(cr % 4 - 1);
                cr /= 4;
            }
            nearest = std::min(nearest, (torus.latticeBasis * (u - s)).norm());
        }
        best = std::max(best, nearest);
    }
    return best;
}

GeometricData geometric_data(const FlatTorusModel& model, int resolution) {
    GeometricData geo;
    geo.n = model.n;
    const auto n = static_cast<std::size_t>(model.n);
    geo.omega.assign(n * n * n, 0.0);
    geo.riemann.assign(n * n * n * n, 0.0);
    geo.diamZ = torus_diameter(model, resolution);
    return geo;
}

GeometricData geometric_data(const AffineMappingTorus& model, int resolution) {
    GeometricData geo;
    geo.n = model.dimension();
    const auto n = static_cast<std::size_t>(geo.n);
    // constant-coefficient frame (e_theta + A.d_y, eps^-1 G^{-1/2} d_y): flat,
    // all brackets vanish, so omega = 0, Pi = 0 and T = 0 on a circle base
    geo.omega.assign(n * n * n, 0.0);
    geo.riemann.assign(n * n * n * n, 0.0);
    geo.diamZ = model.fiberScale * torus_diameter(model.fiber, resolution);
    return geo;
}

double window_bound(const GeometricData& geo, const WindowConstants& k) {
    if (!(geo.diamZ > 0.0)) return std::numeric_limits<double>::infinity();
    const double arg = k.A / (geo.diamZ * geo.diamZ) -
                       k.C * (geo.normR + geo.normPi * geo.normPi + geo.normT * geo.normT);
    return arg > 0.0 ? std::sqrt(arg) : 0.0;
}

double metric_speed(const GramFamily& family, double t, double h) {
    const RMatrix c = family(t);
    const RMatrix dc = (family(t + h) - family(t - h)) / (2.0 * h);
    Eigen::LLT<RMatrix> llt(0.5 * (c + c.transpose()));
    if (llt.info() != Eigen::Success) throw Error("metric_path: Gram matrix is not positive definite");
    // eigenvalues of c^{-1} c' equal those of L^{-1} c' L^{-T}
    const RMatrix linv = llt.matrixL().solve(RMatrix::Identity(c.rows(), c.cols()));
    const RMatrix sym = linv * (0.5 * (dc + dc.transpose())) * linv.transpose();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double metric_path(const GramFamily& family, int samples, double t0, double t1) {
    if (samples < 2) throw Error("metric_path: need at least two samples");
    const int intervals = samples - 1;
    const double step = (t1 - t0) / intervals;
    std::vector<double> f(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) f[static_cast<std::size_t>(k)] = metric_speed(family, t0 + k * step);
    double sum = 0.0;
    if (intervals % 2 == 0) {
        for (int k = 0; k < samples; ++k) {
            const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
            sum += w * f[static_cast<std::size_t>(k)];
        }
        return sum * step / 3.0;
    }
    for (int k = 0; k < samples; ++k) {
        const double w = (k == 0 || k == intervals) ? 0.5 : 1.0;
        sum += w * f[static_cast<std::size_t>(k)];
    }
    return sum * step;
}

}  // namespace dirac
