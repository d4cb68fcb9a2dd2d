#include "dirac/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dirac {

namespace {

RMatrix sym_power(const RMatrix& g, double power) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (g + g.transpose()));
    RVector d = es.eigenvalues();
    for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = std::pow(d(k), power);
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

/// All xi in Z^n with |xi_k + shift_k| <= N, lexicographic.
std::vector<std::vector<int>> enumerate_modes(const RVector& shift, int N) {
    const auto n = static_cast<std::size_t>(shift.size());
    std::vector<int> lo(n), hi(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = shift(static_cast<Eigen::Index>(k));
        lo[k] = static_cast<int>(std::ceil(-N - s - 1e-12));
        hi[k] = static_cast<int>(std::floor(N - s + 1e-12));
    }
    std::vector<std::vector<int>> modes;
    std::vector<int> cur(lo);
    if (n == 0) return {{}};
    while (true) {
        modes.push_back(cur);
        std::size_t k = n;
        while (k > 0) {
            --k;
            if (cur[k] < hi[k]) {
                ++cur[k];
                for (std::size_t r = k + 1; r < n; ++r) cur[r] = lo[r];
                break;
            }
            if (k == 0) return modes;
        }
    }
}

bool in_cube(const std::vector<int>& xi, const RVector& shift, int N) {
    for (std::size_t k = 0; k < xi.size(); ++k)
        if (std::abs(xi[k] + shift(static_cast<Eigen::Index>(k))) > N + 1e-12) return false;
    return true;
}

RVector shifted(const std::vector<int>& xi, const RVector& shift) {
    RVector p(shift.size());
    for (Eigen::Index k = 0; k < shift.size(); ++k) p(k) = xi[static_cast<std::size_t>(k)] + shift(k);
    return p;
}

bool is_zero_mode(const std::vector<int>& xi, const RVector& shift) {
    return shifted(xi, shift).cwiseAbs().maxCoeff() < 1e-12;
}

/// Zero connection and curvature data for an n-dimensional flat frame.
GeometricData flat_frame(int n) {
    GeometricData geo;
    geo.n = n;
    const auto un = static_cast<std::size_t>(n);
    geo.omega.assign(un * un * un, 0.0);
    geo.riemann.assign(un * un * un * un, 0.0);
    return geo;
}

/// -i/2 sum_j gamma^j sum_ab omega_abj sigma^ab over the given frame indices.
CMatrix connection_term(const CliffordModule& cm, const GeometricData& geo, int from, int to) {
    CMatrix out = CMatrix::Zero(cm.dimV, cm.dimV);
    for (int j = from; j < to; ++j)
        for (int a = from; a < to; ++a)
            for (int b = from; b < to; ++b) {
                const double w = geo.omegaAt(a, b, j);
                if (w != 0.0) out += (-0.5 * kI * w) * cm.gammas[static_cast<std::size_t>(j)] * cm.sigma(a, b);
            }
    return out;
}

/// gamma applied to a fiber vector: sum_j v_j gamma^{offset + j}.
CMatrix gamma_on(const CliffordModule& cm, const RVector& v, int offset) {
    CMatrix out = CMatrix::Zero(cm.dimV, cm.dimV);
    for (Eigen::Index j = 0; j < v.size(); ++j) out += v(j) * cm.gammas[static_cast<std::size_t>(offset + j)];
    return out;
}

double max_eigenvalue(const RMatrix& g) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

int unitary_order(const CMatrix& w, int cap = 4096) {
    const CMatrix id = CMatrix::Identity(w.rows(), w.cols());
    CMatrix power = w;
    for (int k = 1; k <= cap; ++k) {
        if (max_abs(power - id) < 1e-9) return k;
        power = power * w;
    }
    throw Error("monodromy on V has infinite order (or order above " + std::to_string(cap) + ")");
}

/// Eigenspaces of a finite-order unitary W: entry p spans the eigenvalue
/// exp(2 pi i p / K); projector (1/K) sum_t exp(-2 pi i p t / K) W^t.
struct RootSplit {
    int order = 1;
    std::vector<CMatrix> bases;
};

RootSplit split_by_roots(const CMatrix& w) {
    RootSplit split;
    if (w.rows() == 0) return split;
    split.order = unitary_order(w);
    const int K = split.order;
    std::vector<CMatrix> powers{CMatrix::Identity(w.rows(), w.cols())};
    for (int t = 1; t < K; ++t) powers.push_back(powers.back() * w);
    for (int p = 0; p < K; ++p) {
        CMatrix proj = CMatrix::Zero(w.rows(), w.cols());
        for (int t = 0; t < K; ++t) proj += std::exp(Complex(0.0, -2.0 * kPi * p * t / K)) * powers[static_cast<std::size_t>(t)];
        proj /= static_cast<double>(K);
        split.bases.push_back(range_basis(proj, 0.5));
    }
    return split;
}

/// One phi-orbit of fiber modes, the shared data of its blocks.
struct Orbit {
    std::vector<int> rep;
    int length = 1;
};

std::vector<Orbit> fiber_orbits(const AffineMappingTorus& model, int N) {
    const RVector& shift = model.fiber.spinShift;
    const RMatrix phiT = model.holonomyMatrix.cast<double>().transpose();
    std::vector<Orbit> orbits;
    for (const auto& xi : enumerate_modes(shift, N)) {
        std::vector<std::vector<int>> members{xi};
        bool inside = true;
        while (true) {
            const RVector next = phiT * shifted(members.back(), shift) - shift;
            std::vector<int> eta(xi.size());
            for (std::size_t k = 0; k < xi.size(); ++k) eta[k] = static_cast<int>(std::lround(next(static_cast<Eigen::Index>(k))));
            if (eta == xi) break;
            if (!in_cube(eta, shift, N)) inside = false;
            members.push_back(std::move(eta));
        }
        if (!inside) continue;
        if (*std::min_element(members.begin(), members.end()) != xi) continue;
        orbits.push_back({xi, static_cast<int>(members.size())});
    }
    return orbits;
}

/// Iterates over the (orbit, eigenspace, base wave number) blocks of a mapping
/// torus and hands each one to `emit` with its geometric data.
struct MappingBlock {
    const Orbit* orbit = nullptr;
    CMatrix frame;     // columns span the W-eigenspace in V
    double nu = 0.0;   // base wave number in units of 2 pi / L
    double kappaShifted = 0.0;  // kappa + 2 pi A.(xi + delta)
    RVector w;         // G^{-1/2}(xi + delta)
};

template <typename Emit>
double for_each_mapping_block(const AffineMappingTorus& model, const CliffordModule& cm, int N, int baseTruncation,
                              Emit&& emit) {
    model.validate(cm);
    if (N < 1 || baseTruncation < 1) throw Error("assembly: truncations must be at least 1");
    const RVector& shift = model.fiber.spinShift;
    const RMatrix gInvHalf = sym_power(model.fiberGram(), -0.5);
    const CMatrix su = std::exp(Complex(0.0, 2.0 * kPi * model.baseSpinShift)) * model.lift(cm.dimV);
    const double L = model.baseLength;
    const double eps = model.fiberScale;

    const auto orbits = fiber_orbits(model, N);
    if (orbits.empty()) throw Error("assembly: truncation contains no complete fiber-mode orbit");

    // excluded fiber orbits have a member with |xi_k + delta_k| >= N + 1/2
    double reliable = (2.0 * kPi / eps) * (N + 0.5) / std::sqrt(max_eigenvalue(model.fiberGram()));
    for (const auto& orbit : orbits) {
        const RVector p = shifted(orbit.rep, shift);
        const double a = model.connectionForm.dot(p);
        const RVector w = gInvHalf * p;
        CMatrix wMono = CMatrix::Identity(cm.dimV, cm.dimV);
        for (int t = 0; t < orbit.length; ++t) wMono = wMono * su;
        const RootSplit split = split_by_roots(wMono);
        const int K = split.order;
        const int r = orbit.length;
        for (int pIdx = 0; pIdx < K; ++pIdx) {
            const CMatrix& basis = split.bases[static_cast<std::size_t>(pIdx)];
            if (basis.cols() == 0) continue;
            const double frac = static_cast<double>(pIdx) / K;
            const int qLo = static_cast<int>(std::ceil(-baseTruncation * r - frac - 1e-12));
            const int qHi = static_cast<int>(std::floor(baseTruncation * r - frac + 1e-12));
            for (int q = qLo; q <= qHi; ++q) {
                MappingBlock blk;
                blk.orbit = &orbit;
                blk.frame = basis;
                blk.nu = (frac + q) / r;
                blk.kappaShifted = 2.0 * kPi * blk.nu / L + 2.0 * kPi * a;
                blk.w = w;
                emit(blk);
            }
        }
        // base modes beyond the truncation: |kappa| > 2 pi baseTruncation / L
        const double baseEdge = std::max(0.0, 2.0 * kPi * baseTruncation / L - 2.0 * kPi * std::abs(a));
        const double fiberPart = (2.0 * kPi / eps) * w.norm();
        reliable = std::min(reliable, std::sqrt(baseEdge * baseEdge + fiberPart * fiberPart));
    }
    return reliable;
}

std::string torus_ref(const FlatTorusModel& m) { return "flat_torus_n" + std::to_string(m.n); }
std::string mapping_ref(const AffineMappingTorus& m) {
    return "mapping_torus_m" + std::to_string(m.fiber.n) + "_eps" + std::to_string(m.fiberScale);
}

std::vector<BasisLabel> block_labels(const std::vector<int>& mode, double nu, Eigen::Index count) {
    std::vector<BasisLabel> labels;
    for (Eigen::Index c = 0; c < count; ++c) labels.push_back({mode, nu, static_cast<int>(c)});
    return labels;
}

double flat_reliable_level(const FlatTorusModel& model, int N) {
    return 2.0 * kPi * (N + 0.5) / std::sqrt(max_eigenvalue(model.gram()));
}

}  // namespace

std::vector<std::vector<int>> fourier_modes(const RVector& shift, int N) { return enumerate_modes(shift, N); }

AssembledOperator assemble_dirac(const FlatTorusModel& model, const CliffordModule& cm, int N) {
    model.validate();
    if (cm.n != model.n) throw Error("assemble_dirac: module dimension does not match the torus");
    if (N < 1) throw Error("assemble_dirac: truncation must be at least 1");
    const RMatrix dualBasis = model.latticeBasis.transpose().inverse();
    const CMatrix omegaTerm = connection_term(cm, flat_frame(model.n), 0, model.n);

    AssembledOperator op;
    op.truncation = N;
    op.modelRef = torus_ref(model);
    op.reliableLevel = flat_reliable_level(model, N);
    for (const auto& xi : enumerate_modes(model.spinShift, N)) {
        const RVector k = dualBasis * shifted(xi, model.spinShift);
        OperatorBlock blk;
        blk.matrix = 2.0 * kPi * cm.gamma(k) + omegaTerm;
        blk.frame = CMatrix::Identity(cm.dimV, cm.dimV);
        blk.labels = block_labels(xi, 0.0, cm.dimV);
        op.blocks.push_back(std::move(blk));
    }
    return op;
}

AssembledOperator assemble_dirac(const AffineMappingTorus& model, const CliffordModule& cm, int N,
                                 int baseTruncation) {
    AssembledOperator op;
    op.truncation = N;
    op.modelRef = mapping_ref(model);
    const CMatrix omegaTerm = connection_term(cm, flat_frame(cm.n), 0, cm.n);
    const double eps = model.fiberScale;
    op.reliableLevel = for_each_mapping_block(model, cm, N, baseTruncation, [&](const MappingBlock& b) {
        const CMatrix full = b.kappaShifted * cm.gammas[0] + (2.0 * kPi / eps) * gamma_on(cm, b.w, 1) + omegaTerm;
        OperatorBlock blk;
        blk.matrix = b.frame.adjoint() * full * b.frame;
        blk.matrix = 0.5 * (blk.matrix + blk.matrix.adjoint()).eval();
        blk.frame = b.frame;
        blk.labels = block_labels(b.orbit->rep, b.nu, b.frame.cols());
        op.blocks.push_back(std::move(blk));
    });
    return op;
}

CMatrix curvature_endomorphism(const GeometricData& geo, const CliffordModule& cm) {
    CMatrix out = CMatrix::Zero(cm.dimV, cm.dimV);
    const auto& g = cm.gammas;
    for (int a = 0; a < geo.n; ++a)
        for (int b = 0; b < geo.n; ++b)
            for (int i = 0; i < geo.n; ++i)
                for (int j = 0; j < geo.n; ++j) {
                    const double r = geo.riemannAt(a, b, i, j);
                    if (r == 0.0) continue;
                    const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
                    out += (-0.125 * r) * (g[ui] * g[uj] - g[uj] * g[ui]) * cm.sigma(a, b);
                }
    return out;
}

AssembledOperator bochner_rhs(const FlatTorusModel& model, const CliffordModule& cm, int N) {
    model.validate();
    if (cm.n != model.n) throw Error("bochner_rhs: module dimension does not match the torus");
    if (N < 1) throw Error("bochner_rhs: truncation must be at least 1");
    const RMatrix dualBasis = model.latticeBasis.transpose().inverse();
    const CMatrix curv = curvature_endomorphism(flat_frame(model.n), cm);
    AssembledOperator op;
    op.truncation = N;
    op.modelRef = torus_ref(model);
    op.reliableLevel = std::pow(flat_reliable_level(model, N), 2);
    for (const auto& xi : enumerate_modes(model.spinShift, N)) {
        const RVector k = dualBasis * shifted(xi, model.spinShift);
        OperatorBlock blk;
        // nabla* nabla = -sum_j e_j^2 has symbol 4 pi^2 |k|^2
        blk.matrix = 4.0 * kPi * kPi * k.squaredNorm() * CMatrix::Identity(cm.dimV, cm.dimV) + curv;
        blk.frame = CMatrix::Identity(cm.dimV, cm.dimV);
        blk.labels = block_labels(xi, 0.0, cm.dimV);
        op.blocks.push_back(std::move(blk));
    }
    return op;
}

AssembledOperator bochner_rhs(const AffineMappingTorus& model, const CliffordModule& cm, int N,
                              int baseTruncation) {
    AssembledOperator op;
    op.truncation = N;
    op.modelRef = mapping_ref(model);
    const CMatrix curv = curvature_endomorphism(geometric_data(model, 2), cm);
    const double eps = model.fiberScale;
    const double level = for_each_mapping_block(model, cm, N, baseTruncation, [&](const MappingBlock& b) {
        // -(e_theta^2 + sum f_j^2) on the block: (kappa + 2 pi a)^2 + (2 pi / eps)^2 |w|^2
        const double symbol = b.kappaShifted * b.kappaShifted + std::pow(2.0 * kPi / eps, 2) * b.w.squaredNorm();
        OperatorBlock blk;
        blk.matrix = symbol * CMatrix::Identity(b.frame.cols(), b.frame.cols()) + b.frame.adjoint() * curv * b.frame;
        blk.frame = b.frame;
        blk.labels = block_labels(b.orbit->rep, b.nu, b.frame.cols());
        op.blocks.push_back(std::move(blk));
    });
    op.reliableLevel = level * level;
    return op;
}

double bochner_residual(const AssembledOperator& dirac, const AssembledOperator& rhs) {
    if (dirac.blocks.size() != rhs.blocks.size()) throw Error("bochner_residual: block layouts differ");
    double r = 0.0;
    for (std::size_t k = 0; k < dirac.blocks.size(); ++k) {
        const CMatrix& d = dirac.blocks[k].matrix;
        if (d.rows() != rhs.blocks[k].matrix.rows()) throw Error("bochner_residual: block layouts differ");
        r = std::max(r, max_abs(d * d - rhs.blocks[k].matrix));
    }
    return r;
}

HolonomyRep fiber_holonomy(const AffineMappingTorus& model, const CliffordModule& cm) {
    HolonomyRep rep;
    rep.dimV = cm.dimV;
    for (Eigen::Index k = 0; k < model.fiber.spinShift.size(); ++k)
        rep.generators.push_back(std::exp(Complex(0.0, 2.0 * kPi * model.fiber.spinShift(k))) *
                                 CMatrix::Identity(cm.dimV, cm.dimV));
    return rep;
}

FiberSplit fiber_invariant_split(const AffineMappingTorus& model, const CliffordModule& cm, int N,
                                 int baseTruncation, const WindowConstants& k) {
    FiberSplit split;
    const AssembledOperator dm = assemble_dirac(model, cm, N, baseTruncation);
    const RVector& shift = model.fiber.spinShift;
    const bool hasZeroMode = shift.cwiseAbs().maxCoeff() < 1e-12;
    split.invariantBasis = fixed_subspace(fiber_holonomy(model, cm));
    if (!hasZeroMode) split.invariantBasis = CMatrix(cm.dimV, 0);
    split.invariantDim = static_cast<int>(split.invariantBasis.cols());
    const CMatrix pGamma = split.invariantBasis * split.invariantBasis.adjoint();

    split.projector.truncation = dm.truncation;
    split.projector.modelRef = dm.modelRef;
    split.projector.reliableLevel = dm.reliableLevel;
    for (const auto& blk : dm.blocks) {
        OperatorBlock pb;
        pb.frame = blk.frame;
        pb.labels = blk.labels;
        const bool zero = is_zero_mode(blk.labels.front().fiberMode, shift);
        pb.matrix = zero ? CMatrix(blk.frame.adjoint() * pGamma * blk.frame)
                         : CMatrix::Zero(blk.matrix.rows(), blk.matrix.cols());
        split.projector.blocks.push_back(std::move(pb));
    }

    // D^Z on one fiber: modes xi with block (2 pi / eps) gamma(G^{-1/2}(xi + delta)),
    // fiber gammas only
    const RMatrix gInvHalf = sym_power(model.fiberGram(), -0.5);
    const GeometricData geo = geometric_data(model);
    const CMatrix fiberOmega = connection_term(cm, geo, 1, cm.n);
    const double eps = model.fiberScale;
    split.dInv.truncation = N;
    split.dInv.modelRef = dm.modelRef + "_fiber_invariant";
    if (split.invariantDim > 0) {
        OperatorBlock inv;
        inv.frame = split.invariantBasis;
        inv.matrix = split.invariantBasis.adjoint() * fiberOmega * split.invariantBasis;
        inv.labels = block_labels(std::vector<int>(static_cast<std::size_t>(model.fiber.n), 0), 0.0,
                                  split.invariantDim);
        split.dInv.blocks.push_back(std::move(inv));
    }
    split.gap = std::numeric_limits<double>::infinity();
    for (const auto& xi : enumerate_modes(shift, N)) {
        const CMatrix dz = (2.0 * kPi / eps) * gamma_on(cm, gInvHalf * shifted(xi, shift), 1) + fiberOmega;
        CMatrix complement = CMatrix::Identity(cm.dimV, cm.dimV);
        if (is_zero_mode(xi, shift)) complement -= pGamma;
        const CMatrix basis = range_basis(complement, 0.5);
        if (basis.cols() == 0) continue;
        const RVector ev = hermitian_eigenvalues(CMatrix(basis.adjoint() * dz * basis));
        split.gap = std::min(split.gap, ev.cwiseAbs().minCoeff());
    }
    split.gapBound = k.A / (geo.diamZ * geo.diamZ) - k.C * geo.normR;
    split.gapBoundHolds = split.gap * split.gap >= split.gapBound * (1.0 - 1e-12);
    return split;
}

CMatrix calV_term(const CliffordModule& cm, const GeometricData& geo, int baseDim) {
    const int n = cm.n;
    const auto& g = cm.gammas;
    const auto at = [](int k) { return static_cast<std::size_t>(k); };
    CMatrix sum = CMatrix::Zero(cm.dimV, cm.dimV);
    for (int a = 0; a < baseDim; ++a) {
        for (int j = baseDim; j < n; ++j) {
            for (int k = baseDim; k < n; ++k) sum += geo.omegaAt(a, j, k) * g[at(k)] * cm.sigma(a, j);
            sum += 0.5 * geo.omegaAt(a, j, j) * g[at(a)];
        }
        for (int b = 0; b < baseDim; ++b)
            for (int j = baseDim; j < n; ++j)
                sum += geo.omegaAt(a, b, j) * (g[at(j)] * cm.sigma(a, b) + g[at(a)] * cm.sigma(j, b));
    }
    return -kI * sum;
}

CMatrix limit_zeroth_order(const CliffordModule& cm, const GeometricData& geo, int baseDim) {
    const int n = cm.n;
    const auto& g = cm.gammas;
    const auto at = [](int k) { return static_cast<std::size_t>(k); };
    // fiber part of D^W at the affine-parallel (constant) mode
    CMatrix out = connection_term(cm, geo, baseDim, n);
    for (int a = 0; a < baseDim; ++a) {
        CMatrix inner = CMatrix::Zero(cm.dimV, cm.dimV);
        for (int b = 0; b < baseDim; ++b)
            for (int c = 0; c < baseDim; ++c) inner += 0.5 * geo.omegaAt(b, c, a) * cm.sigma(b, c);
        for (int j = baseDim; j < n; ++j) {
            for (int k = baseDim; k < n; ++k) inner += 0.5 * geo.omegaAt(j, k, a) * cm.sigma(j, k);
            inner -= 0.5 * geo.omegaAt(a, j, j) * CMatrix::Identity(cm.dimV, cm.dimV);
        }
        out += -kI * g[at(a)] * inner;
        for (int b = 0; b < baseDim; ++b)
            for (int j = baseDim; j < n; ++j) out += (0.5 * kI * geo.omegaAt(a, b, j)) * g[at(j)] * cm.sigma(a, b);
    }
    return out + calV_term(cm, geo, baseDim);
}

SuperconnectionPieces superconnection_pieces(const AffineMappingTorus& model, const CliffordModule& cm, int N) {
    model.validate(cm);
    const GeometricData geo = geometric_data(model);
    const int n = cm.n;
    const int baseDim = 1;
    SuperconnectionPieces pieces;

    const RVector& shift = model.fiber.spinShift;
    const RMatrix gInvHalf = sym_power(model.fiberGram(), -0.5);
    const CMatrix fiberOmega = connection_term(cm, geo, baseDim, n);
    pieces.fiberDirac.truncation = N;
    pieces.fiberDirac.modelRef = mapping_ref(model) + "_fiber";
    for (const auto& xi : enumerate_modes(shift, N)) {
        OperatorBlock blk;
        blk.matrix = (2.0 * kPi / model.fiberScale) * gamma_on(cm, gInvHalf * shifted(xi, shift), baseDim) + fiberOmega;
        blk.frame = CMatrix::Identity(cm.dimV, cm.dimV);
        blk.labels = block_labels(xi, 0.0, cm.dimV);
        pieces.fiberDirac.blocks.push_back(std::move(blk));
    }
    pieces.fiberDirac.reliableLevel =
        (2.0 * kPi / model.fiberScale) * (N + 0.5) / std::sqrt(max_eigenvalue(model.fiberGram()));

    for (int a = 0; a < baseDim; ++a) {
        CMatrix conn = CMatrix::Zero(cm.dimV, cm.dimV);
        for (int j = baseDim; j < n; ++j) {
            for (int k = baseDim; k < n; ++k) conn += 0.5 * geo.omegaAt(j, k, a) * cm.sigma(j, k);
            conn -= 0.5 * geo.omegaAt(a, j, j) * CMatrix::Identity(cm.dimV, cm.dimV);
        }
        pieces.baseConnection.push_back(conn);
        for (int b = a + 1; b < baseDim; ++b) {
            CMatrix ct = CMatrix::Zero(cm.dimV, cm.dimV);
            for (int j = baseDim; j < n; ++j) ct += (2.0 * kI * geo.omegaAt(a, b, j)) * cm.gammas[static_cast<std::size_t>(j)];
            pieces.cT.push_back(ct);
        }
    }
    pieces.calV = calV_term(cm, geo, baseDim);
    return pieces;
}

AssembledOperator limit_operator(const AffineMappingTorus& model, const CliffordModule& cm, int baseTruncation) {
    model.validate(cm);
    if (baseTruncation < 1) throw Error("limit_operator: base truncation must be at least 1");
    const RVector& shift = model.fiber.spinShift;
    if (shift.cwiseAbs().maxCoeff() >= 1e-12)
        throw Error("limit_operator: no affine-parallel sections (fiber spin structure is nontrivial); use blowup_check");
    const CMatrix inv = fixed_subspace(fiber_holonomy(model, cm));
    if (inv.cols() == 0) throw Error("limit_operator: invariant space V^Gamma is empty; use blowup_check");

    const CMatrix su = std::exp(Complex(0.0, 2.0 * kPi * model.baseSpinShift)) * model.lift(cm.dimV);
    const CMatrix wInv = inv.adjoint() * su * inv;
    if (max_abs(su * inv - inv * wInv) > 1e-10) throw Error("limit_operator: monodromy does not preserve V^Gamma");
    const GeometricData geo = geometric_data(model);
    const CMatrix zInv = inv.adjoint() * limit_zeroth_order(cm, geo, 1) * inv;
    if (max_abs(zInv * wInv - wInv * zInv) > 1e-10)
        throw Error("limit_operator: zeroth-order term does not commute with the monodromy");
    const CMatrix g0Inv = inv.adjoint() * cm.gammas[0] * inv;

    AssembledOperator op;
    op.truncation = baseTruncation;
    op.modelRef = mapping_ref(model) + "_limit";
    const RootSplit split = split_by_roots(wInv);
    const int K = split.order;
    const double L = model.baseLength;
    const std::vector<int> zero(static_cast<std::size_t>(model.fiber.n), 0);
    for (int p = 0; p < K; ++p) {
        const CMatrix& basis = split.bases[static_cast<std::size_t>(p)];
        if (basis.cols() == 0) continue;
        const double frac = static_cast<double>(p) / K;
        const int qLo = static_cast<int>(std::ceil(-baseTruncation - frac - 1e-12));
        const int qHi = static_cast<int>(std::floor(baseTruncation - frac + 1e-12));
        for (int q = qLo; q <= qHi; ++q) {
            const double nu = frac + q;
            OperatorBlock blk;
            blk.matrix = basis.adjoint() * ((2.0 * kPi * nu / L) * g0Inv + zInv) * basis;
            blk.matrix = 0.5 * (blk.matrix + blk.matrix.adjoint()).eval();
            blk.frame = inv * basis;
            blk.labels = block_labels(zero, nu, basis.cols());
            op.blocks.push_back(std::move(blk));
        }
    }
    op.reliableLevel = std::max(0.0, 2.0 * kPi * baseTruncation / L - max_abs(zInv) * zInv.rows());
    return op;
}

FrameBundleSpectra frame_bundle_operator(const FlatTorusModel& model, const CliffordModule& cm, int N,
                                         int groupTruncation) {
    model.validate();
    if (model.n != 2 || cm.n != 2) throw Error("frame_bundle_operator: only n = 2 is supported");
    if (groupTruncation < 3)
        throw Error("frame_bundle_operator: group truncation must be at least 3 (fields shift weights by 2)");
    if (cm.group == GroupTag::SO && model.spinShift.cwiseAbs().maxCoeff() > 0.0)
        throw Error("frame_bundle_operator: SO modules do not see a spin structure");

    FrameBundleSpectra out;
    out.cV = casimir(cm);

    const AssembledOperator d = assemble_dirac(model, cm, N);
    std::vector<double> sq;
    for (const auto& blk : d.blocks) {
        const RVector ev = hermitian_eigenvalues(CMatrix(blk.matrix * blk.matrix));
        for (Eigen::Index k = 0; k < ev.size(); ++k) sq.push_back(ev(k));
    }

    const RMatrix dualBasis = model.latticeBasis.transpose().inverse();
    const CMatrix sigma12 = cm.sigma(0, 1);
    const int dimV = cm.dimV;
    std::vector<double> lap;
    for (int parity = 0; parity < 2; ++parity) {
        std::vector<int> weights;
        for (int m = -groupTruncation; m <= groupTruncation; ++m)
            if (((m % 2) + 2) % 2 == parity) weights.push_back(m);
        const auto nm = static_cast<Eigen::Index>(weights.size());
        const RVector shift = parity == 1 ? model.spinShift : RVector::Zero(2);
        // cos psi and sin psi shift the weight m by +-2 (psi is the Spin(2) angle)
        CMatrix cosOp = CMatrix::Zero(nm, nm), sinOp = CMatrix::Zero(nm, nm);
        for (Eigen::Index r = 0; r + 1 < nm; ++r) {
            cosOp(r + 1, r) += 0.5;
            cosOp(r, r + 1) += 0.5;
            sinOp(r + 1, r) += Complex(0.0, -0.5);  // e^{i psi} / (2i)
            sinOp(r, r + 1) += Complex(0.0, 0.5);   // -e^{-i psi} / (2i)
        }
        CMatrix vertical = CMatrix::Zero(nm, nm);
        for (Eigen::Index r = 0; r < nm; ++r) vertical(r, r) = Complex(0.0, 0.5 * weights[static_cast<std::size_t>(r)]);
        const CMatrix idV = CMatrix::Identity(dimV, dimV);
        const auto kronV = [&](const CMatrix& a) {
            CMatrix out2 = CMatrix::Zero(nm * dimV, nm * dimV);
            for (Eigen::Index i = 0; i < nm; ++i)
                for (Eigen::Index j = 0; j < nm; ++j)
                    if (a(i, j) != Complex(0.0)) out2.block(i * dimV, j * dimV, dimV, dimV) = a(i, j) * idV;
            return out2;
        };
        // invariance: (d/dpsi + sigma^12) f = 0, i.e. kernel of m/2 - i sigma^12
        CMatrix invariance = CMatrix::Zero(nm * dimV, nm * dimV);
        for (Eigen::Index r = 0; r < nm; ++r)
            invariance.block(r * dimV, r * dimV, dimV, dimV) =
                0.5 * weights[static_cast<std::size_t>(r)] * idV - kI * sigma12;
        const CMatrix invBasis = kernel_basis(invariance, 1e-9);
        if (invBasis.cols() == 0) continue;

        for (const auto& xi : enumerate_modes(shift, N)) {
            const RVector k = dualBasis * shifted(xi, shift);
            const Complex d1 = Complex(0.0, 2.0 * kPi * k(0));
            const Complex d2 = Complex(0.0, 2.0 * kPi * k(1));
            // Y_j = sum_k R_kj(psi) d_k with R the rotation by psi
            const CMatrix y1 = kronV(d1 * cosOp + d2 * sinOp);
            const CMatrix y2 = kronV(-d1 * sinOp + d2 * cosOp);
            const CMatrix ya = kronV(vertical);
            const CMatrix laplacian = -(y1 * y1 + y2 * y2 + ya * ya);
            const CMatrix restricted = invBasis.adjoint() * (laplacian - out.cV * CMatrix::Identity(nm * dimV, nm * dimV)) * invBasis;
            const RVector ev = hermitian_eigenvalues(CMatrix(0.5 * (restricted + restricted.adjoint())));
            for (Eigen::Index e = 0; e < ev.size(); ++e) lap.push_back(ev(e));
            out.invariantDim += static_cast<int>(ev.size());
        }
    }
    const double scale = std::max(1.0, sq.empty() ? 1.0 : *std::max_element(sq.begin(), sq.end()));
    out.diracSquared = make_spectrum(std::move(sq), 1e-8 * scale, N);
    out.laplacianMinusCasimir = make_spectrum(std::move(lap), 1e-8 * scale, N);
    return out;
}

namespace {

struct BranchData {
    CMatrix block;
    RVector values;
    CMatrix vectors;
};

BranchData branch_data(const RMatrix& gram, const CliffordModule& cm, const RVector& shift,
                       const std::vector<int>& mode) {
    if (gram.rows() != cm.n || shift.size() != cm.n || static_cast<int>(mode.size()) != cm.n)
        throw Error("eigenvalue branch: dimension mismatch");
    Eigen::LLT<RMatrix> llt(gram);
    if (llt.info() != Eigen::Success) throw Error("eigenvalue branch: Gram matrix is not positive definite");
    BranchData d;
    // orthonormal frame e_j = sum_k (G^{-1/2})_kj d_k
    d.block = 2.0 * kPi * cm.gamma(sym_power(gram, -0.5) * shifted(mode, shift));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(d.block);
    d.values = es.eigenvalues();
    d.vectors = es.eigenvectors();
    return d;
}

}  // namespace

double branch_eigenvalue(const RMatrix& gram, const CliffordModule& cm, const RVector& shift,
                         const std::vector<int>& mode, int branch) {
    const BranchData d = branch_data(gram, cm, shift, mode);
    if (branch < 0 || branch >= d.values.size()) throw Error("eigenvalue branch: branch index out of range");
    return d.values(branch);
}

double eigenvalue_derivative(const GramFamily& family, const CliffordModule& cm, const RVector& shift,
                             const std::vector<int>& mode, int branch, double t0, double h) {
    const RMatrix g = family(t0);
    const RMatrix gDot = (family(t0 + h) - family(t0 - h)) / (2.0 * h);
    const BranchData d = branch_data(g, cm, shift, mode);
    if (branch < 0 || branch >= d.values.size()) throw Error("eigenvalue_derivative: branch index out of range");
    const double lambda = d.values(branch);
    const double tol = 1e-8 * std::max(1.0, std::abs(lambda));
    for (Eigen::Index k = 0; k < d.values.size(); ++k)
        if (k != branch && std::abs(d.values(k) - lambda) <= tol)
            throw Error("eigenvalue_derivative: eigenvalue is degenerate within its Fourier block");

    // psi = v e^{2 pi i p.y} / sqrt(vol); the volume density f(t) is constant on a
    // flat torus, so the conjugation f^{1/2} D f^{-1/2} leaves the branch unchanged
    const int n = cm.n;
    const CVector v = d.vectors.col(branch);
    const RVector p = shifted(mode, shift);
    const RMatrix gHalf = sym_power(g, 0.5);
    const double vol = std::sqrt(g.determinant());
    // gamma(d_k) = sum_j (G^{1/2})_jk gamma^j ; nabla_{d_l} psi = 2 pi i p_l psi
    RVector expectation(n);
    for (int k = 0; k < n; ++k) {
        const CMatrix gk = cm.gamma(gHalf.col(k));
        expectation(k) = v.dot(gk * v).real();  // <v, gamma(d_k) v>
    }
    RMatrix T(n, n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            // <psi, -i gamma(X) nabla_Y psi> + c.c. = 2 * 2 pi p_Y <v, gamma(X) v> / vol
            T(k, l) = 4.0 * kPi * (p(l) * expectation(k) + p(k) * expectation(l)) / vol;
    const RMatrix gInv = g.inverse();
    const double trace = (gInv * gDot * gInv * T).trace();
    return -0.125 * trace * vol;
}

}  // namespace dirac
