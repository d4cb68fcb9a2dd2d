#include "dirac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dirac {

std::vector<std::pair<double, int>> Spectrum::clusters() const {
    std::vector<std::pair<double, int>> out;
    double prev = 0.0;
    for (double v : values) {
        if (!out.empty() && v - prev <= clusterTol) {
            ++out.back().second;
        } else {
            out.emplace_back(v, 1);
        }
        prev = v;
    }
    return out;
}

Spectrum make_spectrum(std::vector<double> values, double clusterTol, int truncation) {
    std::sort(values.begin(), values.end());
    return Spectrum{std::move(values), clusterTol, truncation};
}

RVector hermitian_eigenvalues(const CMatrix& h) {
    if (h.rows() != h.cols()) throw Error("eigensolve: matrix is not square");
    if (h.size() == 0) return RVector(0);
    const double scale = std::max(1.0, max_abs(h));
    if (hermitian_residual(h) > 1e-12 * scale) throw Error("eigensolve: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    if (es.info() != Eigen::Success) throw Error("eigensolve: Hermitian solver did not converge");
    const double norm = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < h.rows(); ++k) {
        const double res = (h * es.eigenvectors().col(k) - es.eigenvalues()(k) * es.eigenvectors().col(k)).norm();
        if (res > 1e-10 * norm) throw Error("eigensolve: eigenpair residual above tolerance");
    }
    return es.eigenvalues();
}

Spectrum eigensolve(const AssembledOperator& op) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(op.dimension()));
    double norm = 0.0;
    for (const auto& b : op.blocks) {
        const RVector ev = hermitian_eigenvalues(b.matrix);
        for (Eigen::Index k = 0; k < ev.size(); ++k) {
            values.push_back(ev(k));
            norm = std::max(norm, std::abs(ev(k)));
        }
    }
    return make_spectrum(std::move(values), 1e-8 * std::max(1.0, norm), op.truncation);
}

Spectrum sinh_rescale(const Spectrum& s, double K) {
    if (!(K > 0.0)) throw Error("sinh_rescale: K must be positive");
    Spectrum out = s;
    const double root = std::sqrt(K);
    for (double& v : out.values) v = std::asinh(v / root);
    return out;
}

Spectrum absolute_spectrum(const Spectrum& s) {
    std::vector<double> v;
    v.reserve(s.size());
    for (double x : s.values) v.push_back(std::abs(x));
    return make_spectrum(std::move(v), s.clusterTol, s.sourceTruncation);
}

Matching epsilon_close(const Spectrum& a, const Spectrum& b, double eps) {
    Matching m;
    if (a.size() != b.size()) return m;
    m.maxDeviation = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        m.pairs.emplace_back(k, k);
        m.maxDeviation = std::max(m.maxDeviation, std::abs(a.values[k] - b.values[k]));
    }
    m.close = m.maxDeviation <= eps;
    return m;
}

bool subset_epsilon_close(const Spectrum& a, const Spectrum& b, double eps) {
    if (a.size() > b.size()) return false;
    std::size_t j = 0;
    for (double x : a.values) {
        while (j < b.size() && b.values[j] < x - eps) ++j;
        if (j == b.size() || b.values[j] > x + eps) return false;
        ++j;
    }
    return true;
}

Spectrum window_intersect(const Spectrum& s, double W) {
    if (W < 0.0) throw Error("window_intersect: W must be non-negative");
    Spectrum out = s;
    out.values.clear();
    for (double v : s.values)
        if (std::isinf(W) || std::abs(v) <= W || std::abs(v) <= s.clusterTol) out.values.push_back(v);
    return out;
}

std::string to_csv(const Spectrum& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", s.clusterTol);
    std::string out = "# truncation=" + std::to_string(s.sourceTruncation) + ", clusterTol=" + buf + "\n";
    out += "eigenvalue\n";
    for (double v : s.values) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out += buf;
    }
    return out;
}

}  // namespace dirac
