#include "dirac/types.hpp"

#include <vector>

namespace dirac {

CMatrix exp_anti_hermitian(const CMatrix& x, double t) {
    const CMatrix h = kI * x;  // Hermitian when x is anti-Hermitian
    if (hermitian_residual(h) > 1e-10 * std::max(1.0, max_abs(h)))
        throw Error("exp_anti_hermitian: argument is not anti-Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
    // x = -i h, so exp(t x) = V diag(exp(-i t mu)) V*
    CVector phases(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < phases.size(); ++k)
        phases(k) = std::exp(-kI * t * es.eigenvalues()(k));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

CMatrix select_columns(const Eigen::SelfAdjointEigenSolver<CMatrix>& es, bool keepLarge,
                       double tol) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const bool large = std::abs(es.eigenvalues()(k)) > tol;
        if (large == keepLarge) keep.push_back(k);
    }
    CMatrix basis(es.eigenvectors().rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
        basis.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]);
    return basis;
}

}  // namespace

CMatrix range_basis(const CMatrix& hermitian, double tol) {
    if (hermitian.size() == 0) return CMatrix(hermitian.rows(), 0);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (hermitian + hermitian.adjoint()));
    return select_columns(es, true, tol);
}

CMatrix kernel_basis(const CMatrix& hermitian, double tol) {
    if (hermitian.size() == 0) return CMatrix(hermitian.rows(), 0);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (hermitian + hermitian.adjoint()));
    return select_columns(es, false, tol);
}

}  // namespace dirac
