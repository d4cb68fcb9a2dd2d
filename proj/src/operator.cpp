#include "dirac/operator.hpp"

#include <cstdio>
#include <ostream>

namespace dirac {

Eigen::Index AssembledOperator::dimension() const {
    Eigen::Index d = 0;
    for (const auto& b : blocks) d += b.matrix.rows();
    return d;
}

CMatrix AssembledOperator::dense() const {
    const Eigen::Index d = dimension();
    CMatrix out = CMatrix::Zero(d, d);
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
        out.block(off, off, b.matrix.rows(), b.matrix.cols()) = b.matrix;
        off += b.matrix.rows();
    }
    return out;
}

std::vector<BasisLabel> AssembledOperator::basisLabels() const {
    std::vector<BasisLabel> labels;
    for (const auto& b : blocks) labels.insert(labels.end(), b.labels.begin(), b.labels.end());
    return labels;
}

double AssembledOperator::hermitianResidual() const {
    double r = 0.0;
    for (const auto& b : blocks) r = std::max(r, hermitian_residual(b.matrix));
    return r;
}

void write_dense(std::ostream& os, const AssembledOperator& op) {
    const CMatrix m = op.dense();
    os << m.rows() << ' ' << m.cols() << '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g %.17g", m(i, j).real(), m(i, j).imag());
            if (j) os << ' ';
            os << buf;
        }
        os << '\n';
    }
}

}  // namespace dirac
