#pragma once

#include "dirac/types.hpp"

namespace dirac {

/// [[alpha, beta], [gamma, delta]] with alpha p x p and delta q x q.
struct BlockMatrix2x2 {
    CMatrix alpha, beta, gamma, delta;

    Eigen::Index p() const { return alpha.rows(); }
    Eigen::Index q() const { return delta.rows(); }
    void validate() const;
    CMatrix dense() const;

    static BlockMatrix2x2 split(const CMatrix& m, Eigen::Index p);
};

/// Block inverse through the Schur complement delta - gamma alpha^{-1} beta.
/// Throws when alpha or the Schur complement has condition number above `condCap`.
BlockMatrix2x2 schur_inverse(const BlockMatrix2x2& m, double condCap = 1e12);

struct NeumannReport {
    double factorizationResidual = 0.0;  // |delta^{1/2}(I - X)delta^{1/2} - S| / max(1, |S|)
    double contractionNorm = 0.0;        // |X|_2, X = delta^{-1/2} gamma alpha^{-1} beta delta^{-1/2}
    bool invertible = false;             // contractionNorm < 1
    bool directlyInvertible = false;     // cond(S) <= 1e12
    double inverseResidual = 0.0;        // Neumann-series inverse vs direct, relative; 0 if not invertible
};

/// delta must be H + i k Id with H Hermitian (k = deltaShift); when k = 0, H must
/// be positive definite. delta^{1/2} uses principal roots of the eigenvalues of H + ik.
NeumannReport neumann_factorization_check(const BlockMatrix2x2& m, double deltaShift = 0.0);

}  // namespace dirac
