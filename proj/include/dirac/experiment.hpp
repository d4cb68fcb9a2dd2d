#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dirac/geometry.hpp"

namespace dirac {

struct ModelConfig {
    std::string kind = "torus";  // torus | mapping_torus
    std::vector<double> lattice{1.0};  // row-major n x n, columns generate the lattice
    std::vector<double> shift{0.0};
    std::vector<int> holonomy;         // row-major m x m, empty means identity
    std::vector<int> liftPlane;        // two gamma indices, empty means identity lift
    double liftAngleTurns = 0.0;
    double liftSign = 1.0;
    double baseLength = 2.0 * kPi;
    double baseShift = 0.0;
    std::vector<double> connection;    // empty means zero
    std::vector<double> epsilons{1.0};
};

struct NumericConfig {
    int truncation = 4;
    int baseTruncation = 8;
    int kMax = 4;
    double matchTol = 1e-9;
    WindowConstants window{};
    double K = 1.0;
    double C = 5.0;
    int samples = 11;
    int trials = 20;
    int dimension = 2;
    int groupTruncation = 5;
    int blocks = 50;
    int blockSize = 6;
    double residualTol = 1e-10;
    double minRate = 0.4;
};

/// One experiment per file. INI layout: [experiment] name, seed;
/// [module] kind; [model] ...; [numeric] ... (see the README for keys).
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 7;
    std::string moduleKind = "spinor";  // spinor | exterior
    ModelConfig model;
    NumericConfig numeric;

    void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Names accepted in [experiment] name.
const std::vector<std::string>& experiment_names();

struct RunResult {
    bool pass = true;
    std::vector<std::string> failures;
    std::vector<std::filesystem::path> files;
};

/// Runs the experiment and writes its artifacts into `outDir`. Outputs depend
/// only on the config and the seed. Throws Error on unknown experiments,
/// malformed models and unwritable paths.
RunResult run(const ExperimentConfig& config, const std::filesystem::path& outDir,
              std::optional<std::uint64_t> seedOverride = std::nullopt, std::ostream* log = nullptr);

}  // namespace dirac
