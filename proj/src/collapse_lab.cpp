#include "dirac/collapse_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <random>

namespace dirac {

namespace {

void require_decreasing(const std::vector<double>& eps) {
    if (eps.empty()) throw Error("collapse: epsilon list is empty");
    for (std::size_t k = 0; k < eps.size(); ++k) {
        if (!(eps[k] > 0.0)) throw Error("collapse: epsilons must be positive");
        if (k > 0 && !(eps[k] < eps[k - 1])) throw Error("collapse: epsilons must be strictly decreasing");
    }
}

int parallel_dimension(const AffineMappingTorus& model, const CliffordModule& cm) {
    if (model.fiber.spinShift.cwiseAbs().maxCoeff() >= 1e-12) return 0;
    return static_cast<int>(fixed_subspace(fiber_holonomy(model, cm)).cols());
}

struct ScaleResult {
    Spectrum spectrum;
    double reliable = 0.0;
    double W = 0.0;
};

ScaleResult solve_scale(const AffineMappingTorus& model, const CliffordModule& cm, double eps, int N,
                        int baseTruncation, const WindowConstants& window) {
    const AffineMappingTorus scaled = model.withScale(eps);
    const AssembledOperator op = assemble_dirac(scaled, cm, N, baseTruncation);
    return {eigensolve(op), op.reliableLevel, window_bound(geometric_data(scaled), window)};
}

std::vector<ScaleResult> solve_scales(const AffineMappingTorus& model, const CliffordModule& cm,
                                      const std::vector<double>& eps, int N, int baseTruncation,
                                      const WindowConstants& window) {
    std::vector<std::future<ScaleResult>> jobs;
    for (double e : eps)
        jobs.push_back(std::async(std::launch::async, solve_scale, std::cref(model), std::cref(cm), e, N,
                                  baseTruncation, std::cref(window)));
    std::vector<ScaleResult> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::string to_string(Verdict v) { return v == Verdict::converges ? "converges" : "blows_up"; }

bool CollapseReport::windowPass() const {
    if (!windowCountNondecreasing) return false;
    return std::all_of(windowChecks.begin(), windowChecks.end(), [](const WindowCheck& w) { return w.equal; });
}

CollapseReport collapse_run(const AffineMappingTorus& model, const CliffordModule& cm,
                            const std::vector<double>& epsList, const CollapseSettings& settings) {
    require_decreasing(epsList);
    if (settings.kMax < 1) throw Error("collapse_run: kMax must be at least 1");
    model.validate(cm);

    CollapseReport report;
    report.epsilons = epsList;
    report.verdict = parallel_dimension(model, cm) > 0 ? Verdict::converges : Verdict::blows_up;
    const auto kMax = static_cast<std::size_t>(settings.kMax);

    const auto scales = solve_scales(model, cm, epsList, settings.N, settings.baseTruncation, settings.window);
    report.trackedEigenvalues.assign(kMax, {});
    for (std::size_t e = 0; e < scales.size(); ++e) {
        const Spectrum abs = absolute_spectrum(scales[e].spectrum);
        if (abs.size() < kMax || abs.values[kMax - 1] >= scales[e].reliable)
            throw Error("collapse_run: truncation too small to resolve lambda_" + std::to_string(kMax) +
                        " at eps = " + fmt(epsList[e]));
        for (std::size_t k = 0; k < kMax; ++k) report.trackedEigenvalues[k].push_back(abs.values[k]);
        report.spectraPerEps.push_back(scales[e].spectrum);
        report.windowBounds.push_back(scales[e].W);
    }
    if (report.verdict == Verdict::blows_up) return report;

    const AssembledOperator limitOp = limit_operator(model, cm, settings.baseTruncation);
    const Spectrum limit = eigensolve(limitOp);
    const Spectrum limitAbs = absolute_spectrum(limit);
    if (limitAbs.size() < kMax || limitAbs.values[kMax - 1] >= limitOp.reliableLevel)
        throw Error("collapse_run: base truncation too small to resolve lambda_" + std::to_string(kMax) +
                    " of the limit operator");
    report.limitSpectrum = limit;
    report.trackingErrors.assign(kMax, {});
    for (std::size_t k = 0; k < kMax; ++k) {
        report.limitEigenvalues.push_back(limitAbs.values[k]);
        for (double v : report.trackedEigenvalues[k]) report.trackingErrors[k].push_back(std::abs(v - limitAbs.values[k]));
    }

    // open window: with A = pi^2 the bound is attained by non-parallel modes
    for (std::size_t e = 0; e < scales.size(); ++e) {
        const double W = scales[e].W * (1.0 - 1e-12);
        if (W >= scales[e].reliable || W >= limitOp.reliableLevel)
            throw Error("collapse_run: truncation does not cover the spectral window at eps = " + fmt(epsList[e]));
        const Spectrum a = window_intersect(scales[e].spectrum, W);
        const Spectrum b = window_intersect(limit, W);
        const Matching m = epsilon_close(a, b, settings.matchTol);
        WindowCheck wc;
        wc.W = scales[e].W;
        wc.matched = a.size();
        wc.limitMatched = b.size();
        wc.maxDeviation = m.maxDeviation;
        wc.equal = m.close;
        if (!report.windowChecks.empty() && wc.matched < report.windowChecks.back().matched)
            report.windowCountNondecreasing = false;
        report.windowChecks.push_back(wc);
    }
    return report;
}

BlowupReport blowup_check(const AffineMappingTorus& model, const CliffordModule& cm,
                          const std::vector<double>& epsList, int N, int baseTruncation) {
    require_decreasing(epsList);
    model.validate(cm);
    if (parallel_dimension(model, cm) > 0)
        throw Error("blowup_check: the model has affine-parallel sections; use collapse_run");
    BlowupReport report;
    report.epsilons = epsList;
    report.rate = std::numeric_limits<double>::infinity();
    const auto scales = solve_scales(model, cm, epsList, N, baseTruncation, WindowConstants{});
    for (std::size_t e = 0; e < scales.size(); ++e) {
        const Spectrum abs = absolute_spectrum(scales[e].spectrum);
        if (abs.size() == 0 || abs.values.front() >= scales[e].reliable)
            throw Error("blowup_check: truncation too small at eps = " + fmt(epsList[e]));
        report.minAbs.push_back(abs.values.front());
        report.rate = std::min(report.rate, epsList[e] * abs.values.front());
    }
    return report;
}

PerturbationReport perturbation_bound_check(const GramFamily& path, const CliffordModule& cm, const RVector& shift,
                                            double K, int N, int samples, double C) {
    if (!(K > 0.0)) throw Error("perturbation_bound_check: K must be positive");
    if (samples < 2) throw Error("perturbation_bound_check: need at least two samples");
    PerturbationReport report;
    report.C = C;
    report.segments = samples - 1;
    const auto modes = fourier_modes(shift, N);
    const double root = std::sqrt(K);

    // values[t][branch], branches ordered by (mode, in-block index)
    std::vector<std::vector<double>> values(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        const RMatrix g = path(static_cast<double>(s) / (samples - 1));
        for (const auto& xi : modes)
            for (int b = 0; b < cm.dimV; ++b)
                values[static_cast<std::size_t>(s)].push_back(std::asinh(branch_eigenvalue(g, cm, shift, xi, b) / root));
    }
    report.branches = static_cast<int>(values.front().size());

    for (int s = 0; s + 1 < samples; ++s) {
        const double t0 = static_cast<double>(s) / (samples - 1);
        const double t1 = static_cast<double>(s + 1) / (samples - 1);
        const double len = metric_path(path, 9, t0, t1);
        report.pathLength += len;
        const auto& a = values[static_cast<std::size_t>(s)];
        const auto& b = values[static_cast<std::size_t>(s + 1)];
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double d = std::abs(b[k] - a[k]);
            double ratio = 0.0;
            if (len > 1e-15) {
                ratio = d / len;
            } else if (d > 1e-13) {
                ratio = std::numeric_limits<double>::infinity();
            }
            report.maxObservedRatio = std::max(report.maxObservedRatio, ratio);
        }
    }
    report.pass = report.maxObservedRatio <= C;
    return report;
}

MinimaxReport minimax_check(const AssembledOperator& op, int k, int trials, std::uint64_t seed) {
    const CMatrix h = op.dense();
    const Eigen::Index d = h.rows();
    if (k < 1 || k > d) throw Error("minimax_check: k must lie in [1, dim]");
    const CMatrix h2 = h * h;
    const RVector ev = hermitian_eigenvalues(CMatrix(0.5 * (h2 + h2.adjoint())));
    const double target = ev(k - 1);
    const double tol = 1e-9 * std::max(1.0, ev.cwiseAbs().maxCoeff());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    MinimaxReport report;
    report.trials = trials;
    report.minMargin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        CMatrix x(d, k);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < k; ++j) x(i, j) = Complex(normal(rng), normal(rng));
        const CMatrix q = Eigen::HouseholderQR<CMatrix>(x).householderQ() * CMatrix::Identity(d, k);
        const CMatrix r = q.adjoint() * h2 * q;
        const double sup = hermitian_eigenvalues(CMatrix(0.5 * (r + r.adjoint()))).maxCoeff();
        report.minMargin = std::min(report.minMargin, sup - target);
        if (sup < target - tol) ++report.violations;
    }
    return report;
}

nlohmann::json to_json(const Spectrum& s) {
    return {{"values", s.values}, {"clusterTol", s.clusterTol}, {"sourceTruncation", s.sourceTruncation}};
}

nlohmann::json to_json(const CollapseReport& r) {
    nlohmann::json j;
    j["epsilons"] = r.epsilons;
    j["spectraPerEps"] = nlohmann::json::array();
    for (const auto& s : r.spectraPerEps) j["spectraPerEps"].push_back(to_json(s));
    j["limitSpectrum"] = r.limitSpectrum ? to_json(*r.limitSpectrum) : nlohmann::json(nullptr);
    j["trackedEigenvalues"] = r.trackedEigenvalues;
    j["limitEigenvalues"] = r.limitEigenvalues;
    j["trackingErrors"] = r.trackingErrors;
    j["windowBounds"] = r.windowBounds;
    j["windowChecks"] = nlohmann::json::array();
    for (const auto& w : r.windowChecks)
        j["windowChecks"].push_back({{"W", w.W},
                                     {"matched", w.matched},
                                     {"limitMatched", w.limitMatched},
                                     {"maxDeviation", w.maxDeviation},
                                     {"equal", w.equal}});
    j["windowCountNondecreasing"] = r.windowCountNondecreasing;
    j["verdict"] = to_string(r.verdict);
    return j;
}

nlohmann::json to_json(const BlowupReport& r) {
    return {{"epsilons", r.epsilons}, {"minAbs", r.minAbs}, {"rate", r.rate}};
}

nlohmann::json to_json(const PerturbationReport& r) {
    return {{"maxObservedRatio", r.maxObservedRatio}, {"C", r.C},         {"pass", r.pass},
            {"branches", r.branches},                 {"segments", r.segments}, {"pathLength", r.pathLength}};
}

std::string tracked_csv(const CollapseReport& r) {
    std::string out = "epsilon";
    for (std::size_t k = 0; k < r.trackedEigenvalues.size(); ++k) out += ",lambda_" + std::to_string(k + 1);
    out += ",W\n";
    for (std::size_t e = 0; e < r.epsilons.size(); ++e) {
        out += fmt(r.epsilons[e]);
        for (const auto& curve : r.trackedEigenvalues) out += "," + fmt(curve[e]);
        out += "," + fmt(r.windowBounds[e]) + "\n";
    }
    return out;
}

}  // namespace dirac
