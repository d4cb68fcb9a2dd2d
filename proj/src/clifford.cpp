#include "dirac/clifford.hpp"

#include <algorithm>
#include <bit>
#include <deque>

namespace dirac {

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMatrix pauli_x() {
    CMatrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

CMatrix pauli_y() {
    CMatrix m(2, 2);
    m << 0.0, -kI, kI, 0.0;
    return m;
}

CMatrix pauli_z() {
    CMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

CMatrix tensor_string(int zs, const CMatrix& middle, int ids) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (int k = 0; k < zs; ++k) out = kron(out, pauli_z());
    out = kron(out, middle);
    for (int k = 0; k < ids; ++k) out = kron(out, CMatrix::Identity(2, 2));
    return out;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

void fill_sigmas_from(CliffordModule& cm, const std::vector<CMatrix>& extra) {
    const auto n = static_cast<std::size_t>(cm.n);
    cm.sigmaTable.assign(n * n, CMatrix::Zero(cm.dimV, cm.dimV));
    for (int a = 0; a < cm.n; ++a)
        for (int b = 0; b < cm.n; ++b) {
            if (a == b) continue;
            const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
            CMatrix s = 0.25 * commutator(cm.gammas[ua], cm.gammas[ub]);
            if (!extra.empty()) s += 0.25 * commutator(extra[ua], extra[ub]);
            cm.sigmaTable[ua * n + ub] = s;
        }
}

}  // namespace

CMatrix CliffordModule::gamma(const RVector& v) const {
    if (v.size() != n) throw Error("CliffordModule::gamma: vector dimension mismatch");
    CMatrix out = CMatrix::Zero(dimV, dimV);
    for (int j = 0; j < n; ++j) out += v(j) * gammas[static_cast<std::size_t>(j)];
    return out;
}

double CliffordResiduals::max() const {
    return std::max({clifford, hermiticity, lieBracket, equivariance, hatAnticommute});
}

CliffordResiduals check_relations(const CliffordModule& cm) {
    CliffordResiduals r;
    const CMatrix id = CMatrix::Identity(cm.dimV, cm.dimV);
    const auto delta = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    const auto& g = cm.gammas;
    const auto at = [](int k) { return static_cast<std::size_t>(k); };

    for (int a = 0; a < cm.n; ++a) {
        r.hermiticity = std::max(r.hermiticity, hermitian_residual(g[at(a)]));
        for (int b = 0; b < cm.n; ++b) {
            const CMatrix anti = g[at(a)] * g[at(b)] + g[at(b)] * g[at(a)] - 2.0 * delta(a, b) * id;
            r.clifford = std::max(r.clifford, max_abs(anti));
            const CMatrix& s = cm.sigma(a, b);
            r.hermiticity = std::max(r.hermiticity, max_abs(s + s.adjoint()));
            r.hermiticity = std::max(r.hermiticity, max_abs(s + cm.sigma(b, a)));
        }
    }

    for (int a = 0; a < cm.n; ++a)
        for (int b = 0; b < cm.n; ++b)
            for (int c = 0; c < cm.n; ++c) {
                // [gamma^a, sigma^{bc}] = delta^{ab} gamma^c - delta^{ac} gamma^b
                const CMatrix lhs = commutator(g[at(a)], cm.sigma(b, c));
                const CMatrix rhs = delta(a, b) * g[at(c)] - delta(a, c) * g[at(b)];
                r.equivariance = std::max(r.equivariance, max_abs(lhs - rhs));
                for (int d = 0; d < cm.n; ++d) {
                    const CMatrix br = commutator(cm.sigma(a, b), cm.sigma(c, d));
                    const CMatrix expect = delta(a, d) * cm.sigma(b, c) - delta(a, c) * cm.sigma(b, d) +
                                           delta(b, c) * cm.sigma(a, d) - delta(b, d) * cm.sigma(a, c);
                    r.lieBracket = std::max(r.lieBracket, max_abs(br - expect));
                }
            }

    if (!cm.hatGammas.empty()) {
        const auto& h = cm.hatGammas;
        for (int a = 0; a < cm.n; ++a)
            for (int b = 0; b < cm.n; ++b) {
                r.hatAnticommute = std::max(r.hatAnticommute, max_abs(g[at(a)] * h[at(b)] + h[at(b)] * g[at(a)]));
                const CMatrix hh = h[at(a)] * h[at(b)] + h[at(b)] * h[at(a)] - 2.0 * delta(a, b) * id;
                r.hatAnticommute = std::max(r.hatAnticommute, max_abs(hh));
            }
        for (const auto& m : h) r.hermiticity = std::max(r.hermiticity, hermitian_residual(m));
    }
    return r;
}

CliffordModule spinor_gammas(int n) {
    if (n < 1 || n > 8) throw Error("spinor_gammas: n must lie in [1, 8]");
    const int m = n / 2;
    CliffordModule cm;
    cm.n = n;
    cm.group = GroupTag::Spin;
    cm.dimV = 1 << m;
    for (int k = 0; k < m; ++k) {
        cm.gammas.push_back(tensor_string(k, pauli_x(), m - k - 1));
        cm.gammas.push_back(tensor_string(k, pauli_y(), m - k - 1));
    }
    if (n % 2 == 1) {
        CMatrix chir = CMatrix::Identity(1, 1);
        for (int k = 0; k < m; ++k) chir = kron(chir, pauli_z());
        cm.gammas.push_back(chir);
    }
    fill_sigmas_from(cm, {});
    return cm;
}

CliffordModule exterior_module(int n) {
    if (n < 1 || n > 6) throw Error("exterior_module: n must lie in [1, 6]");
    const int dim = 1 << n;
    CliffordModule cm;
    cm.n = n;
    cm.group = GroupTag::SO;
    cm.dimV = dim;
    for (int j = 0; j < n; ++j) {
        // basis e_S indexed by bitmask S; E^j e_S = (-1)^{#{i in S : i < j}} e_{S u {j}}
        RMatrix ext = RMatrix::Zero(dim, dim);
        for (int s = 0; s < dim; ++s) {
            if (s & (1 << j)) continue;
            const int below = std::popcount(static_cast<unsigned>(s & ((1 << j) - 1)));
            ext(s | (1 << j), s) = (below % 2 == 0) ? 1.0 : -1.0;
        }
        const CMatrix e = ext.cast<Complex>();
        const CMatrix i = ext.transpose().cast<Complex>();
        cm.gammas.push_back(kI * (e - i));
        cm.hatGammas.push_back(e + i);
    }
    fill_sigmas_from(cm, cm.hatGammas);
    return cm;
}

std::vector<CMatrix> group_closure(const HolonomyRep& rep, std::size_t orderCap) {
    for (const auto& g : rep.generators) {
        if (g.rows() != rep.dimV || g.cols() != rep.dimV)
            throw Error("group_closure: generator has wrong shape");
        if (unitary_residual(g) > 1e-10) throw Error("group_closure: generator is not unitary");
    }
    std::vector<CMatrix> elements{CMatrix::Identity(rep.dimV, rep.dimV)};
    std::deque<std::size_t> frontier{0};
    const auto known = [&](const CMatrix& m) {
        return std::any_of(elements.begin(), elements.end(),
                           [&](const CMatrix& e) { return max_abs(e - m) < 1e-9; });
    };
    while (!frontier.empty()) {
        const std::size_t idx = frontier.front();
        frontier.pop_front();
        for (const auto& g : rep.generators) {
            CMatrix next = g * elements[idx];
            if (known(next)) continue;
            if (elements.size() >= orderCap)
                throw Error("group_closure: generated group exceeds the order cap of " +
                            std::to_string(orderCap));
            elements.push_back(std::move(next));
            frontier.push_back(elements.size() - 1);
        }
    }
    return elements;
}

CMatrix fixed_subspace(const HolonomyRep& rep, std::size_t orderCap) {
    const auto group = group_closure(rep, orderCap);
    CMatrix avg = CMatrix::Zero(rep.dimV, rep.dimV);
    for (const auto& g : group) avg += g;
    avg /= static_cast<double>(group.size());
    return range_basis(avg, 0.5);  // projector eigenvalues are 0 or 1
}

CMatrix casimir_operator(const CliffordModule& cm) {
    CMatrix sum = CMatrix::Zero(cm.dimV, cm.dimV);
    for (int a = 0; a < cm.n; ++a)
        for (int b = a + 1; b < cm.n; ++b) sum -= cm.sigma(a, b) * cm.sigma(a, b);
    return sum;
}

std::vector<CasimirBlock> casimir_blocks(const CliffordModule& cm, double tol) {
    const CMatrix c = casimir_operator(cm);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (c + c.adjoint()));
    std::vector<CasimirBlock> blocks;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double v = es.eigenvalues()(k);
        if (!blocks.empty() && std::abs(blocks.back().value - v) <= tol) {
            ++blocks.back().multiplicity;
        } else {
            blocks.push_back({v, 1});
        }
    }
    return blocks;
}

double casimir(const CliffordModule& cm) {
    const CMatrix c = casimir_operator(cm);
    const double scalar = c.trace().real() / cm.dimV;
    if (max_abs(c - scalar * CMatrix::Identity(cm.dimV, cm.dimV)) > 1e-10)
        throw Error("casimir: Casimir operator is not scalar on this module (use casimir_blocks)");
    return scalar;
}

CMatrix rotation_lift(const CliffordModule& cm, int a, int b, double angle) {
    if (a < 0 || b < 0 || a >= cm.n || b >= cm.n || a == b)
        throw Error("rotation_lift: invalid rotation plane");
    return exp_anti_hermitian(cm.sigma(a, b), -angle);
}

}  // namespace dirac
