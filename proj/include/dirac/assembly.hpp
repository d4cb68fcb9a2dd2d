#pragma once

#include "dirac/geometry.hpp"
#include "dirac/operator.hpp"
#include "dirac/spectral.hpp"

namespace dirac {

// ---------------------------------------------------------------------------
// Dirac operator D = -i sum_j gamma^j (e_j + 1/2 sum_ab omega_abj sigma^ab)
// and its Bochner square on the flat models.
//
// Flat torus: modes xi in Z^n with ||xi + delta||_inf <= N; the block of mode
// xi is 2 pi gamma(k) with k = B^{-T}(xi + delta).
//
// Mapping torus: fiber modes xi are permuted by xi -> phi^T(xi + delta) - delta
// when going once around the base. An orbit of length r is equivalent to one
// fiber mode on a base circle of length rL with monodromy W = (sU)^r; W is
// split into eigenspaces by exact root-of-unity projectors and each base
// wave number kappa gives the block
//   gamma^0 (kappa + 2 pi A.(xi+delta)) + (2 pi / eps) gamma(G^{-1/2}(xi+delta)).
// Base wave numbers kappa = 2 pi nu / L are kept for |nu| <= baseTruncation.
// ---------------------------------------------------------------------------

/// Fourier modes xi in Z^n with ||xi + shift||_inf <= N, lexicographic.
std::vector<std::vector<int>> fourier_modes(const RVector& shift, int N);

AssembledOperator assemble_dirac(const FlatTorusModel& model, const CliffordModule& cm, int N);
AssembledOperator assemble_dirac(const AffineMappingTorus& model, const CliffordModule& cm, int N,
                                 int baseTruncation);

/// nabla* nabla - 1/8 sum R_abij (gamma^i gamma^j - gamma^j gamma^i) sigma^ab,
/// in the same basis and block layout as assemble_dirac.
AssembledOperator bochner_rhs(const FlatTorusModel& model, const CliffordModule& cm, int N);
AssembledOperator bochner_rhs(const AffineMappingTorus& model, const CliffordModule& cm, int N,
                              int baseTruncation);

/// The zeroth-order curvature endomorphism of the Bochner identity.
CMatrix curvature_endomorphism(const GeometricData& geo, const CliffordModule& cm);

/// max over blocks of |D^2 - rhs|.
double bochner_residual(const AssembledOperator& dirac, const AssembledOperator& rhs);

/// Holonomy representation of the fiber's affine group on V: for a torus fiber
/// the translation generators act through the spin character exp(2 pi i delta_k).
HolonomyRep fiber_holonomy(const AffineMappingTorus& model, const CliffordModule& cm);

struct FiberSplit {
    CMatrix invariantBasis;          // orthonormal basis of V^Gamma (columns)
    int invariantDim = 0;            // dim of affine-parallel sections
    AssembledOperator projector;     // same block layout as assemble_dirac(model, ...)
    AssembledOperator dInv;          // D^Z on the affine-parallel sections
    double gap = 0.0;                // min |sigma(D^Z)| on the orthocomplement
    double gapBound = 0.0;           // A diam^-2 - C |R^Z|
    bool gapBoundHolds = false;      // gap^2 >= gapBound
};

FiberSplit fiber_invariant_split(const AffineMappingTorus& model, const CliffordModule& cm, int N,
                                 int baseTruncation, const WindowConstants& k = {});

/// Pieces of the Bismut superconnection for a split of the frame into base
/// indices [0, baseDim) and fiber indices [baseDim, n).
struct SuperconnectionPieces {
    AssembledOperator fiberDirac;            // D^W on the fiber Fourier modes
    std::vector<CMatrix> baseConnection;     // per base alpha: 1/2 omega_jk alpha sigma^jk - 1/2 omega_alpha jj
    std::vector<CMatrix> cT;                 // coefficient of tau^a ^ tau^b (a < b base): 2i omega_abj gamma^j
    CMatrix calV;                            // zeroth-order term of the limit operator
};

/// -i (omega_ajk gamma^k sigma^aj + 1/2 omega_ajj gamma^a
///     + omega_abj (gamma^j sigma^ab + gamma^a sigma^jb)), a, b base and j, k fiber.
CMatrix calV_term(const CliffordModule& cm, const GeometricData& geo, int baseDim);

/// Constant zeroth-order part of the quantized superconnection plus calV.
CMatrix limit_zeroth_order(const CliffordModule& cm, const GeometricData& geo, int baseDim);

SuperconnectionPieces superconnection_pieces(const AffineMappingTorus& model, const CliffordModule& cm, int N);

/// D^B: the quantized superconnection plus calV restricted to affine-parallel
/// sections, on base-circle Fourier modes. Throws when V^Gamma = 0.
AssembledOperator limit_operator(const AffineMappingTorus& model, const CliffordModule& cm, int baseTruncation);

struct FrameBundleSpectra {
    Spectrum diracSquared;             // sigma((D^M)^2)
    Spectrum laplacianMinusCasimir;    // sigma(Delta^P - c_V) on G-invariants
    double cV = 0.0;
    int invariantDim = 0;
};

/// Frame bundle P = T^2 x Spin(2) of a flat 2-torus. Delta^P uses the
/// orthonormal fields {Y_1, Y_2, Y_12} (Y_12 unit for -1/2 Tr), acting on
/// Fourier modes e^{2 pi i k.x} e^{i m psi / 2}, |m| <= groupTruncation, with
/// psi in [0, 4 pi) the Spin(2) angle; odd m carry the spin shift.
FrameBundleSpectra frame_bundle_operator(const FlatTorusModel& model, const CliffordModule& cm, int N,
                                         int groupTruncation);

/// Eigenvalue branch of the flat torus R^n/Z^n with metric G in lattice
/// coordinates: the `branch`-th eigenvalue (ascending) of the block of mode xi.
double branch_eigenvalue(const RMatrix& gram, const CliffordModule& cm, const RVector& shift,
                         const std::vector<int>& mode, int branch);

/// d lambda / dt = -1/8 int Tr(c' T) dvol, with T built from the exact Fourier
/// eigenvector of the branch. Throws if the eigenvalue is degenerate inside
/// its block.
double eigenvalue_derivative(const GramFamily& family, const CliffordModule& cm, const RVector& shift,
                             const std::vector<int>& mode, int branch, double t0, double h = 1e-6);

}  // namespace dirac
