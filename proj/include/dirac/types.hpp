#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dirac {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

/// Raised for every contract violation in the library (bad model data,
/// non-Hermitian input, empty invariant space, ...).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Largest absolute entry; the residual norm used throughout.
inline double max_abs(const CMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermitian_residual(const CMatrix& m) {
    return max_abs(m - m.adjoint());
}

inline double unitary_residual(const CMatrix& u) {
    return max_abs(u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols()));
}

/// exp(t * X) for anti-Hermitian X, through the eigendecomposition of iX.
CMatrix exp_anti_hermitian(const CMatrix& x, double t = 1.0);

/// Orthonormal basis (columns) of the range of a Hermitian projector-like
/// matrix: eigenvectors with eigenvalue above `tol`.
CMatrix range_basis(const CMatrix& hermitian, double tol = 1e-8);

/// Orthonormal basis of the kernel of a Hermitian matrix.
CMatrix kernel_basis(const CMatrix& hermitian, double tol = 1e-8);

}  // namespace dirac
