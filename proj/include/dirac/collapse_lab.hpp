#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dirac/assembly.hpp"

namespace dirac {

enum class Verdict { converges, blows_up };

std::string to_string(Verdict v);

/// Window comparison at one scale.
struct WindowCheck {
    double W = 0.0;
    std::size_t matched = 0;       // eigenvalues of D^M inside the open window
    std::size_t limitMatched = 0;  // eigenvalues of D^B inside the open window
    double maxDeviation = 0.0;
    bool equal = false;
};

struct CollapseReport {
    std::vector<double> epsilons;
    std::vector<Spectrum> spectraPerEps;
    std::optional<Spectrum> limitSpectrum;
    /// trackedEigenvalues[k-1][e] = lambda_k(|D^{M_eps}|), k = 1..kMax.
    std::vector<std::vector<double>> trackedEigenvalues;
    std::vector<double> limitEigenvalues;             // lambda_k(|D^B|), converging runs only
    std::vector<std::vector<double>> trackingErrors;  // |lambda_k(eps) - lambda_k(limit)|
    std::vector<double> windowBounds;
    std::vector<WindowCheck> windowChecks;            // converging runs only
    bool windowCountNondecreasing = true;
    Verdict verdict = Verdict::converges;

    /// Every window check matched and the count never decreased.
    bool windowPass() const;
};

struct CollapseSettings {
    int kMax = 4;
    int N = 4;               // fiber truncation
    int baseTruncation = 8;  // base truncation of D^M and D^B
    WindowConstants window{};
    double matchTol = 1e-9;
};

/// Spectra of D^{M_eps} for each eps (computed concurrently), lambda_k
/// tracking and the spectral-window comparison against D^B.
/// Throws when epsList is not strictly decreasing, or when the truncation
/// cannot resolve lambda_kMax or the window at some scale.
CollapseReport collapse_run(const AffineMappingTorus& model, const CliffordModule& cm,
                            const std::vector<double>& epsList, const CollapseSettings& settings = {});

struct BlowupReport {
    std::vector<double> epsilons;
    std::vector<double> minAbs;  // min |sigma(D^{M_eps})|
    double rate = 0.0;           // a = min_eps eps * minAbs
};

/// min |sigma(D^{M_eps})| >= a / eps with the fitted a. Throws when the model
/// has affine-parallel sections.
BlowupReport blowup_check(const AffineMappingTorus& model, const CliffordModule& cm,
                          const std::vector<double>& epsList, int N, int baseTruncation);

struct PerturbationReport {
    double maxObservedRatio = 0.0;  // max over branches and segments of |d asinh| / l(segment)
    double C = 0.0;
    bool pass = true;
    int branches = 0;
    int segments = 0;
    double pathLength = 0.0;
};

/// Tracks every eigenvalue branch of R^n/Z^n with metric path(t), t in [0, 1],
/// on `samples` nodes and checks |d asinh(lambda / sqrt K)| <= C l(c) on every
/// segment. Branches are labelled by (mode, sorted index inside the block);
/// the blocks decouple exactly so no crossing can mix them.
PerturbationReport perturbation_bound_check(const GramFamily& path, const CliffordModule& cm, const RVector& shift,
                                            double K, int N, int samples, double C = 5.0);

struct MinimaxReport {
    int trials = 0;
    int violations = 0;
    double minMargin = 0.0;  // min over trials of sup Rayleigh(D^2) - lambda_k(D^2)
};

/// Random k-dimensional trial subspaces S: sup_S <v, D^2 v> / |v|^2 must not
/// fall below lambda_k(D^2).
MinimaxReport minimax_check(const AssembledOperator& op, int k, int trials, std::uint64_t seed);

nlohmann::json to_json(const Spectrum& s);
nlohmann::json to_json(const CollapseReport& r);
nlohmann::json to_json(const BlowupReport& r);
nlohmann::json to_json(const PerturbationReport& r);

/// Plot-ready rows: epsilon, lambda_1 .. lambda_kMax, W.
std::string tracked_csv(const CollapseReport& r);

}  // namespace dirac
