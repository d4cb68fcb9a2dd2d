#pragma once

#include <optional>
#include <vector>

#include "dirac/types.hpp"

namespace dirac {

enum class GroupTag { SO, Spin };

/// A G-Clifford module: Hermitian involutions gamma[j] satisfying the Clifford
/// relations, plus the so(n) generators sigma(a, b) acting on V.
///
/// Indices are zero-based. `hatGammas` is filled only for the exterior-algebra
/// module (the commuting second Clifford action E + I).
struct CliffordModule {
    int n = 0;
    GroupTag group = GroupTag::Spin;
    int dimV = 0;
    std::vector<CMatrix> gammas;
    std::vector<CMatrix> hatGammas;
    std::vector<CMatrix> sigmaTable;  // row-major n*n, sigma(a,b) = -sigma(b,a)

    const CMatrix& sigma(int a, int b) const { return sigmaTable[static_cast<std::size_t>(a * n + b)]; }

    /// gamma(v) = sum_j v_j gamma^j.
    CMatrix gamma(const RVector& v) const;
};

/// Residuals of the defining relations; each must be < 1e-12 for a valid module.
struct CliffordResiduals {
    double clifford = 0.0;        // gamma^a gamma^b + gamma^b gamma^a - 2 delta Id
    double hermiticity = 0.0;     // gamma Hermitian, sigma anti-Hermitian and antisymmetric
    double lieBracket = 0.0;      // [sigma^{ab}, sigma^{cd}] relation
    double equivariance = 0.0;    // [gamma^a, sigma^{bc}] relation
    double hatAnticommute = 0.0;  // {gamma^a, hat gamma^b} = 0 and hat-Clifford (exterior only)

    double max() const;
};

CliffordResiduals check_relations(const CliffordModule& cm);

/// Spinor module of Spin(n), 1 <= n <= 8; dimV = 2^floor(n/2).
CliffordModule spinor_gammas(int n);

/// Complexified exterior algebra of R^n as an SO(n)-Clifford module, 1 <= n <= 6.
CliffordModule exterior_module(int n);

/// Images under rho of the affine-holonomy generators, acting unitarily on V.
struct HolonomyRep {
    std::vector<CMatrix> generators;
    int dimV = 0;
};

/// All elements of the finite group generated by `rep`, identity first.
/// Throws if the closure exceeds `orderCap` elements.
std::vector<CMatrix> group_closure(const HolonomyRep& rep, std::size_t orderCap = 1024);

/// Orthonormal basis (columns) of V^Gamma through the group-averaging projector.
CMatrix fixed_subspace(const HolonomyRep& rep, std::size_t orderCap = 1024);

/// Eigenvalue of -sum_a sigma(x_a)^2 on one isotypic block.
struct CasimirBlock {
    double value = 0.0;
    int multiplicity = 0;
};

/// -sum over the so(n) basis x_(ab) = e_ab - e_ba (orthonormal for -1/2 Tr) of
/// sigma(x_(ab))^2, as a matrix on V.
CMatrix casimir_operator(const CliffordModule& cm);

/// Distinct eigenvalues of casimir_operator with multiplicities, ascending.
std::vector<CasimirBlock> casimir_blocks(const CliffordModule& cm, double tol = 1e-10);

/// The scalar c_V; throws when the Casimir operator is not a multiple of Id.
double casimir(const CliffordModule& cm);

/// exp(-angle * sigma^{ab}): the lift acting on V of the rotation by `angle`
/// taking e_a towards e_b. For Spin modules the other lift is its negative.
CMatrix rotation_lift(const CliffordModule& cm, int a, int b, double angle);

}  // namespace dirac
