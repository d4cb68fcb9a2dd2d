#include "dirac/block_resolvent.hpp"

#include <cmath>
#include <limits>

namespace dirac {

namespace {

double condition(const CMatrix& m) {
    if (m.size() == 0) return 1.0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

double spectral_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<CMatrix>(m).singularValues()(0);
}

}  // namespace

void BlockMatrix2x2::validate() const {
    if (alpha.rows() != alpha.cols()) throw Error("BlockMatrix2x2: alpha must be square");
    if (delta.rows() != delta.cols()) throw Error("BlockMatrix2x2: delta must be square");
    if (beta.rows() != p() || beta.cols() != q()) throw Error("BlockMatrix2x2: beta must be p x q");
    if (gamma.rows() != q() || gamma.cols() != p()) throw Error("BlockMatrix2x2: gamma must be q x p");
}

CMatrix BlockMatrix2x2::dense() const {
    validate();
    CMatrix m(p() + q(), p() + q());
    m << alpha, beta, gamma, delta;
    return m;
}

BlockMatrix2x2 BlockMatrix2x2::split(const CMatrix& m, Eigen::Index p) {
    if (m.rows() != m.cols() || p < 0 || p > m.rows()) throw Error("BlockMatrix2x2::split: bad shape");
    const Eigen::Index q = m.rows() - p;
    return {m.topLeftCorner(p, p), m.topRightCorner(p, q), m.bottomLeftCorner(q, p), m.bottomRightCorner(q, q)};
}

BlockMatrix2x2 schur_inverse(const BlockMatrix2x2& m, double condCap) {
    m.validate();
    if (condition(m.alpha) > condCap) throw Error("schur_inverse: alpha is singular");
    const Eigen::PartialPivLU<CMatrix> aLu(m.alpha);
    const CMatrix aInvB = aLu.solve(m.beta);
    const CMatrix aInv = aLu.inverse();
    const CMatrix gAInv = m.gamma * aInv;
    const CMatrix schur = m.delta - m.gamma * aInvB;
    if (condition(schur) > condCap) throw Error("schur_inverse: Schur complement is singular");
    const CMatrix sInv = schur.partialPivLu().inverse();
    BlockMatrix2x2 out;
    out.alpha = aInv + aInvB * sInv * gAInv;
    out.beta = -aInvB * sInv;
    out.gamma = -sInv * gAInv;
    out.delta = sInv;
    return out;
}

NeumannReport neumann_factorization_check(const BlockMatrix2x2& m, double deltaShift) {
    m.validate();
    const Eigen::Index q = m.q();
    const CMatrix idQ = CMatrix::Identity(q, q);
    const CMatrix herm = m.delta - Complex(0.0, deltaShift) * idQ;
    if (hermitian_residual(herm) > 1e-12 * std::max(1.0, max_abs(herm)))
        throw Error("neumann_factorization_check: delta is not Hermitian plus an imaginary shift");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (herm + herm.adjoint()));
    if (deltaShift == 0.0 && q > 0 && es.eigenvalues().minCoeff() <= 0.0)
        throw Error("neumann_factorization_check: delta is not positive definite");
    if (condition(m.alpha) > 1e12) throw Error("neumann_factorization_check: alpha is singular");

    CVector root(q), invRoot(q);
    for (Eigen::Index k = 0; k < q; ++k) {
        root(k) = std::sqrt(Complex(es.eigenvalues()(k), deltaShift));
        invRoot(k) = 1.0 / root(k);
    }
    const CMatrix& v = es.eigenvectors();
    const CMatrix dHalf = v * root.asDiagonal() * v.adjoint();
    const CMatrix dInvHalf = v * invRoot.asDiagonal() * v.adjoint();

    const CMatrix gAb = m.gamma * m.alpha.partialPivLu().solve(m.beta);
    const CMatrix schur = m.delta - gAb;
    const CMatrix x = dInvHalf * gAb * dInvHalf;
    const CMatrix factored = dHalf * (idQ - x) * dHalf;

    NeumannReport r;
    r.factorizationResidual = max_abs(factored - schur) / std::max(1.0, max_abs(schur));
    r.contractionNorm = spectral_norm(x);
    r.invertible = r.contractionNorm < 1.0;
    r.directlyInvertible = condition(schur) <= 1e12;
    if (r.invertible && q > 0) {
        // (I - X)^{-1} = sum_j X^j, truncated once the tail is below 1e-15
        CMatrix series = idQ, term = idQ;
        const int terms = r.contractionNorm > 0.0
                              ? static_cast<int>(std::ceil(std::log(1e-15) / std::log(r.contractionNorm))) + 1
                              : 1;
        for (int j = 0; j < std::min(terms, 200000); ++j) {
            term = term * x;
            series += term;
        }
        const CMatrix neumannInv = dInvHalf * series * dInvHalf;
        const CMatrix direct = schur.partialPivLu().inverse();
        r.inverseResidual = max_abs(neumannInv - direct) / std::max(1e-300, max_abs(direct));
    }
    return r;
}

}  // namespace dirac
