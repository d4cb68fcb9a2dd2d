#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dirac/operator.hpp"

namespace dirac {

/// Sorted real eigenvalues. Values closer than `clusterTol` count as one
/// multiple eigenvalue.
struct Spectrum {
    std::vector<double> values;
    double clusterTol = 1e-8;
    int sourceTruncation = 0;

    std::size_t size() const { return values.size(); }

    /// (representative value, multiplicity) after clustering.
    std::vector<std::pair<double, int>> clusters() const;
};

/// Sorts `values` ascending.
Spectrum make_spectrum(std::vector<double> values, double clusterTol = 1e-8, int truncation = 0);

/// Eigenvalues of a Hermitian block, ascending; throws on non-Hermitian input
/// or when an eigenpair residual exceeds 1e-10 * ||H||.
RVector hermitian_eigenvalues(const CMatrix& h);

/// All eigenvalues, solved block by block. clusterTol = 1e-8 * max(1, ||H||).
Spectrum eigensolve(const AssembledOperator& op);

/// lambda -> asinh(lambda / sqrt(K)).
Spectrum sinh_rescale(const Spectrum& s, double K);

/// lambda -> |lambda|, re-sorted: the eigenvalues lambda_k(|D|).
Spectrum absolute_spectrum(const Spectrum& s);

struct Matching {
    bool close = false;
    /// Sorted pairing (index into a, index into b); empty when sizes differ.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    double maxDeviation = std::numeric_limits<double>::infinity();
};

/// Bijection moving each element by at most eps. On the line the sorted
/// pairing is optimal for the bottleneck cost.
Matching epsilon_close(const Spectrum& a, const Spectrum& b, double eps);

/// Injection a -> b moving each element by at most eps (greedy sorted matching).
bool subset_epsilon_close(const Spectrum& a, const Spectrum& b, double eps);

/// Values with |lambda| <= W; numerical zeros (|lambda| <= clusterTol) are
/// always kept. W = infinity keeps everything.
Spectrum window_intersect(const Spectrum& s, double W);

/// "# truncation=<N>, clusterTol=<tol>", then "eigenvalue", then one value
/// per line in %.17g.
std::string to_csv(const Spectrum& s);

}  // namespace dirac
