// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   acceptance --cli <path to dirac_run> [--configs <dir>]

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include <CLI11.hpp>

#include "dirac/assembly.hpp"
#include "dirac/block_resolvent.hpp"
#include "dirac/collapse_lab.hpp"
#include "dirac/experiment.hpp"

using namespace dirac;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets, fixed here rather than read from configs.
constexpr double kCliffordTol = 1e-12;
constexpr double kCliffordSeconds = 5.0;
constexpr double kBochnerTol = 1e-10;
constexpr double kBochnerSeconds = 30.0;
constexpr double kSpectrumTol = 1e-9;
constexpr double kWindowTol = 1e-9;
constexpr double kBlowupRate = 0.4;
constexpr double kDerivativeRelTol = 1e-4;
constexpr double kDerivativeStep = 1e-4;
constexpr double kPerturbationC = 5.0;
constexpr double kFrameBundleTol = 1e-8;
constexpr double kBlockTol = 1e-10;
constexpr double kContractionGate = 0.99;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Detail {
    std::ostringstream s;
    template <typename T>
    Detail& operator<<(const T& v) {
        s << v;
        return *this;
    }
};

FlatTorusModel random_torus(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> diag(0.7, 1.5), off(-0.3, 0.3);
    std::bernoulli_distribution coin(0.5);
    FlatTorusModel t;
    t.n = n;
    t.latticeBasis = RMatrix(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) t.latticeBasis(r, c) = r == c ? diag(rng) : off(rng);
    t.spinShift = RVector(n);
    for (int k = 0; k < n; ++k) t.spinShift(k) = coin(rng) ? 0.5 : 0.0;
    return t;
}

AffineMappingTorus circle_bundle(double fiberShift, double baseShift, double A, double eps) {
    AffineMappingTorus m;
    m.fiber = FlatTorusModel::circle(2.0 * kPi, fiberShift);
    m.baseSpinShift = baseShift;
    m.connectionForm = RVector::Constant(1, A);
    m.fiberScale = eps;
    return m;
}

std::vector<double> sorted_copy(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

double max_sorted_gap(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    return worst;
}

Outcome ac1() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int n = 1; n <= 6; ++n) worst = std::max(worst, check_relations(spinor_gammas(n)).max());
    for (int n = 1; n <= 4; ++n) worst = std::max(worst, check_relations(exterior_module(n)).max());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Detail d;
    d << "max residual " << worst << ", " << secs << " s";
    return {worst < kCliffordTol && secs < kCliffordSeconds, d.s.str()};
}

Outcome ac2() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    const int N = 8;
    for (int k = 0; k < 10; ++k) {
        const FlatTorusModel t = random_torus(rng, 1 + k % 3);
        const CliffordModule cm = k % 2 ? exterior_module(t.n) : spinor_gammas(t.n);
        worst = std::max(worst, bochner_residual(assemble_dirac(t, cm, N), bochner_rhs(t, cm, N)));
    }
    std::vector<std::pair<AffineMappingTorus, CliffordModule>> bundles;
    {
        const CliffordModule c2 = spinor_gammas(2), c3 = spinor_gammas(3), e3 = exterior_module(3);
        bundles.emplace_back(circle_bundle(0.0, 0.5, 0.3, 0.5), c2);
        bundles.emplace_back(circle_bundle(0.5, 0.0, -0.2, 0.25), c2);
        for (const CliffordModule& cm : {c3, e3}) {
            AffineMappingTorus q;
            q.fiber = FlatTorusModel::cube(2, 1.0, (RVector(2) << 0.5, 0.5).finished());
            q.holonomyMatrix = (Eigen::MatrixXi(2, 2) << 0, -1, 1, 0).finished();
            q.holonomyLift = rotation_lift(cm, 1, 2, kPi / 2.0);
            q.connectionForm = RVector::Zero(2);
            q.fiberScale = 0.5;
            bundles.emplace_back(q, cm);
        }
        AffineMappingTorus flip;
        flip.fiber = FlatTorusModel::cube(2, 2.0 * kPi, (RVector(2) << 0.5, 0.0).finished());
        flip.holonomyMatrix = -Eigen::MatrixXi::Identity(2, 2);
        flip.holonomyLift = rotation_lift(c3, 1, 2, kPi);
        flip.connectionForm = RVector::Zero(2);
        flip.fiberScale = 0.25;
        bundles.emplace_back(flip, c3);
    }
    for (const auto& [m, cm] : bundles)
        worst = std::max(worst, bochner_residual(assemble_dirac(m, cm, N, N), bochner_rhs(m, cm, N, N)));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Detail d;
    d << "10 tori + " << bundles.size() << " mapping tori, max residual " << worst << ", " << secs << " s";
    return {worst < kBochnerTol && secs < kBochnerSeconds && bundles.size() == 5, d.s.str()};
}

Outcome ac3() {
    const int N = 16;
    double worst = 0.0;
    const CliffordModule c1 = spinor_gammas(1), c2 = spinor_gammas(2);
    for (double shift : {0.0, 0.5}) {
        const Spectrum s = eigensolve(assemble_dirac(FlatTorusModel::circle(2.0 * kPi, shift), c1, N));
        std::vector<double> oracle;
        for (int xi = -N - 1; xi <= N; ++xi)
            if (std::abs(xi + shift) <= N) oracle.push_back(xi + shift);
        worst = std::max(worst, max_sorted_gap(s.values, sorted_copy(oracle)));
    }
    for (const RVector& delta : {RVector::Zero(2).eval(), (RVector(2) << 0.5, 0.0).finished(),
                                 (RVector(2) << 0.5, 0.5).finished()}) {
        const Spectrum s = eigensolve(assemble_dirac(FlatTorusModel::cube(2, 1.0, delta), c2, N));
        std::vector<double> oracle;
        for (int a = -N - 1; a <= N; ++a)
            for (int b = -N - 1; b <= N; ++b) {
                const double pa = a + delta(0), pb = b + delta(1);
                if (std::max(std::abs(pa), std::abs(pb)) > N) continue;
                oracle.push_back(2.0 * kPi * std::hypot(pa, pb));
                oracle.push_back(-2.0 * kPi * std::hypot(pa, pb));
            }
        worst = std::max(worst, max_sorted_gap(s.values, sorted_copy(oracle)));
    }
    Detail d;
    d << "circle (2 spin structures) + T^2 (3 spin structures), max deviation " << worst;
    return {worst <= kSpectrumTol, d.s.str()};
}

Outcome ac4() {
    const CliffordModule cm = spinor_gammas(2);
    CollapseSettings s;
    s.N = 4;
    s.baseTruncation = 12;
    s.matchTol = kWindowTol;
    const std::vector<double> eps{1.0, 0.5, 0.25, 0.125};
    const CollapseReport r = collapse_run(circle_bundle(0.0, 0.5, 0.3, 1.0), cm, eps, s);
    bool ok = r.verdict == Verdict::converges && r.windowChecks.size() == eps.size();
    Detail d;
    d << "matched counts";
    for (std::size_t e = 0; ok && e < eps.size(); ++e) {
        const WindowCheck& w = r.windowChecks[e];
        d << " " << w.matched;
        ok = ok && w.equal && w.maxDeviation <= kWindowTol;
        if (e > 0) ok = ok && w.matched > r.windowChecks[e - 1].matched;
    }
    return {ok, d.s.str()};
}

Outcome ac5() {
    const std::vector<double> eps{1.0, 0.5, 0.25, 0.125};
    const BlowupReport circle = blowup_check(circle_bundle(0.5, 0.0, 0.0, 1.0), spinor_gammas(2), eps, 4, 8);
    const CliffordModule c3 = spinor_gammas(3);
    AffineMappingTorus flip;
    flip.fiber = FlatTorusModel::cube(2, 2.0 * kPi, (RVector(2) << 0.5, 0.0).finished());
    flip.holonomyMatrix = -Eigen::MatrixXi::Identity(2, 2);
    flip.holonomyLift = rotation_lift(c3, 1, 2, kPi);
    flip.connectionForm = RVector::Zero(2);
    const BlowupReport torus = blowup_check(flip, c3, eps, 3, 6);
    double exactGap = 0.0;
    for (std::size_t e = 0; e < eps.size(); ++e) exactGap = std::max(exactGap, std::abs(circle.minAbs[e] - 0.5 / eps[e]));
    Detail d;
    d << "rates circle " << circle.rate << ", T^2 " << torus.rate << "; circle |minAbs - 0.5/eps| " << exactGap;
    return {circle.rate >= kBlowupRate && torus.rate >= kBlowupRate && exactGap < 1e-12, d.s.str()};
}

Outcome ac6() {
    std::mt19937_64 rng(66);
    std::uniform_real_distribution<double> u(-0.3, 0.3), tdist(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> modeDist(-2, 2);
    double worst = 0.0;
    int paths = 0;
    while (paths < 20) {
        const int n = 2 + paths % 2;
        const CliffordModule cm = spinor_gammas(n);
        RMatrix m0 = RMatrix::Identity(n, n), m1(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                m0(r, c) += u(rng);
                m1(r, c) = u(rng);
            }
        const GramFamily f = [=](double t) {
            const RMatrix m = m0 + t * m1;
            return RMatrix(m.transpose() * m);
        };
        RVector shift(n);
        for (int k = 0; k < n; ++k) shift(k) = coin(rng) ? 0.5 : 0.0;
        std::vector<int> mode(static_cast<std::size_t>(n));
        for (auto& x : mode) x = modeDist(rng);
        const double t0 = tdist(rng);
        RVector p(n);
        for (int k = 0; k < n; ++k) p(k) = mode[static_cast<std::size_t>(k)] + shift(k);
        if (p.norm() < 0.25) continue;  // zero mode has no simple branch
        const int branch = static_cast<int>(rng() % static_cast<std::uint64_t>(cm.dimV));
        const double h = kDerivativeStep;
        const double fd = (branch_eigenvalue(f(t0 + h), cm, shift, mode, branch) -
                           branch_eigenvalue(f(t0 - h), cm, shift, mode, branch)) / (2.0 * h);
        const double an = eigenvalue_derivative(f, cm, shift, mode, branch, t0);
        worst = std::max(worst, std::abs(an - fd) / std::max(std::abs(fd), 1e-12));
        ++paths;
    }
    Detail d;
    d << paths << " paths, max relative error " << worst;
    return {worst <= kDerivativeRelTol, d.s.str()};
}

Outcome ac7() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> diag(0.7, 1.5), off(-0.2, 0.2), drift(-0.5, 0.5);
    std::bernoulli_distribution coin(0.5);
    double worst = 0.0;
    int failures = 0, paths = 0;
    std::ostringstream offending;
    while (paths < 100) {
        const int n = 1 + paths % 3;
        RMatrix m0(n, n), m1(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                m0(r, c) = r == c ? diag(rng) : off(rng);
                m1(r, c) = drift(rng);
            }
        bool ok = true;
        for (int s = 0; s <= 20 && ok; ++s) ok = std::abs((m0 + (s / 20.0) * m1).determinant()) > 0.2;
        if (!ok) continue;
        RVector shift(n);
        for (int k = 0; k < n; ++k) shift(k) = coin(rng) ? 0.5 : 0.0;
        const GramFamily f = [=](double t) {
            const RMatrix m = m0 + t * m1;
            return RMatrix(m.transpose() * m);
        };
        const PerturbationReport r = perturbation_bound_check(f, spinor_gammas(n), shift, 1.0, 3, 21, kPerturbationC);
        worst = std::max(worst, r.maxObservedRatio);
        if (!r.pass) {
            ++failures;
            offending << " path " << paths << " (n=" << n << ", ratio " << r.maxObservedRatio << ")";
        }
        ++paths;
    }
    Detail d;
    d << paths << " paths, max ratio " << worst << " vs C = " << kPerturbationC;
    if (failures) d << ", offending:" << offending.str();
    return {failures == 0, d.s.str()};
}

Outcome ac8() {
    const CliffordModule cm = spinor_gammas(2);
    std::mt19937_64 rng(88);
    double worst = 0.0, cV = 0.0;
    bool ok = true;
    for (int k = 0; k < 4; ++k) {
        const FlatTorusModel t = k == 0 ? FlatTorusModel::cube(2, 1.0, RVector::Zero(2)) : random_torus(rng, 2);
        const FrameBundleSpectra fb = frame_bundle_operator(t, cm, 3, 5);
        const Matching m = epsilon_close(fb.diracSquared, fb.laplacianMinusCasimir, kFrameBundleTol);
        ok = ok && m.close && std::abs(fb.cV - 0.25) < 1e-14;
        worst = std::max(worst, m.maxDeviation);
        cV = fb.cV;
    }
    Detail d;
    d << "4 tori, max deviation " << worst << ", c_V = " << cV;
    return {ok, d.s.str()};
}

Outcome ac9() {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> sizes(2, 6);
    const auto random = [&](Eigen::Index r, Eigen::Index c, double scale) {
        CMatrix m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = scale * Complex(u(rng), u(rng));
        return m;
    };
    double schurWorst = 0.0, factorWorst = 0.0;
    int verdictMismatch = 0, gated = 0;
    for (int b = 0; b < 50; ++b) {
        const Eigen::Index p = sizes(rng), q = sizes(rng);
        const double k = 0.25 * std::pow(2.0, b % 7);
        const CMatrix ha = random(p, p, 1.0), hd = random(q, q, 1.0);
        BlockMatrix2x2 m;
        m.alpha = 0.5 * (ha + ha.adjoint()) + Complex(0.0, k) * CMatrix::Identity(p, p);
        m.beta = random(p, q, 0.5);
        m.gamma = m.beta.adjoint();
        m.delta = 0.5 * (hd + hd.adjoint()) + Complex(0.0, k) * CMatrix::Identity(q, q);
        const CMatrix dense = m.dense(), inv = schur_inverse(m).dense();
        const CMatrix id = CMatrix::Identity(p + q, p + q);
        schurWorst = std::max({schurWorst, max_abs(dense * inv - id), max_abs(inv * dense - id)});
        const NeumannReport nr = neumann_factorization_check(m, k);
        factorWorst = std::max(factorWorst, nr.factorizationResidual);
        if (nr.contractionNorm < kContractionGate) {
            ++gated;
            // direct oracle: the Schur complement is invertible
            const CMatrix s = m.delta - m.gamma * m.alpha.inverse() * m.beta;
            Eigen::JacobiSVD<CMatrix> svd(s);
            const double cond = svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
            if (!(nr.invertible && cond < 1e12 && nr.inverseResidual <= 1e-9)) ++verdictMismatch;
        }
    }
    Detail d;
    d << "Schur residual " << schurWorst << ", factorization residual " << factorWorst << ", " << gated
      << " gated verdicts, " << verdictMismatch << " mismatches";
    return {schurWorst <= kBlockTol && factorWorst <= kBlockTol && verdictMismatch == 0, d.s.str()};
}

bool perm_oracle(const std::vector<double>& a, const std::vector<double>& b, double eps) {
    if (a.size() != b.size()) return false;
    std::vector<std::size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        bool ok = true;
        for (std::size_t i = 0; i < a.size() && ok; ++i) ok = std::abs(a[i] - b[perm[i]]) <= eps;
        if (ok) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

bool injection_oracle(const std::vector<double>& a, const std::vector<double>& b, std::size_t i,
                      std::vector<bool>& used, double eps) {
    if (i == a.size()) return true;
    for (std::size_t j = 0; j < b.size(); ++j) {
        if (used[j] || std::abs(a[i] - b[j]) > eps) continue;
        used[j] = true;
        if (injection_oracle(a, b, i + 1, used, eps)) return true;
        used[j] = false;
    }
    return false;
}

Outcome ac10() {
    std::mt19937_64 rng(1010);
    std::uniform_int_distribution<int> size(0, 8), grid(0, 16);
    std::uniform_real_distribution<double> tol(0.0, 0.8);
    int disagreements = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int na = size(rng);
        const int nb = trial % 2 ? na : size(rng);
        std::vector<double> a, b;
        for (int k = 0; k < na; ++k) a.push_back(0.25 * grid(rng));
        for (int k = 0; k < nb; ++k) b.push_back(0.25 * grid(rng));
        const double eps = tol(rng);
        const Spectrum sa = make_spectrum(a), sb = make_spectrum(b);
        std::vector<bool> used(b.size(), false);
        if (epsilon_close(sa, sb, eps).close != perm_oracle(sa.values, sb.values, eps)) ++disagreements;
        if (subset_epsilon_close(sa, sb, eps) != injection_oracle(sa.values, sb.values, 0, used, eps)) ++disagreements;
    }
    Detail d;
    d << "500 instances, " << disagreements << " disagreements";
    return {disagreements == 0, d.s.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome ac11(const std::string& cli, const fs::path& configDir) {
    std::vector<fs::path> configs;
    for (const auto& e : fs::directory_iterator(configDir))
        if (e.path().extension() == ".ini") configs.push_back(e.path());
    std::sort(configs.begin(), configs.end());
    std::set<std::string> covered;
    const fs::path root = fs::temp_directory_path() / "dirac_acceptance_ac11";
    fs::remove_all(root);
    int mismatches = 0, errors = 0;
    std::size_t files = 0;
    for (const auto& cfg : configs) {
        covered.insert(load_config(cfg).experiment);
        std::vector<fs::path> outs{root / (cfg.stem().string() + "_1"), root / (cfg.stem().string() + "_2")};
        for (const auto& out : outs) {
            const int status = std::system((cli + " --config " + cfg.string() + " --out " + out.string() + " 2>/dev/null").c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++errors;
        }
        if (!fs::exists(outs[0])) continue;
        for (const auto& f : fs::directory_iterator(outs[0])) {
            ++files;
            if (!fs::exists(outs[1] / f.path().filename()) || slurp(f.path()) != slurp(outs[1] / f.path().filename()))
                ++mismatches;
        }
    }
    fs::remove_all(root);
    Detail d;
    d << configs.size() << " configs covering " << covered.size() << "/" << experiment_names().size()
      << " experiments, " << files << " files, " << mismatches << " mismatches, " << errors << " failed runs";
    return {mismatches == 0 && errors == 0 && files > 0 && covered.size() == experiment_names().size(), d.s.str()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string cli;
    std::string configDir = DIRAC_CONFIG_DIR;
    app.add_option("--cli", cli, "path to dirac_run")->required();
    app.add_option("--configs", configDir, "directory of experiment configs");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1  Clifford relations", ac1},
        {"AC2  Bochner identity", ac2},
        {"AC3  analytic torus spectra", ac3},
        {"AC4  spectral window", ac4},
        {"AC5  blow-up rate", ac5},
        {"AC6  eigenvalue derivative", ac6},
        {"AC7  perturbation bound", ac7},
        {"AC8  frame-bundle identity", ac8},
        {"AC9  block identities", ac9},
        {"AC10 comparison predicates", ac10},
        {"AC11 CLI determinism", [&] { return ac11(cli, configDir); }},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << secs << " s]\n";
        if (!o.pass) ++failed;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
