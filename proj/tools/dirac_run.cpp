// Batch front-end: runs one experiment config and writes its reports.
//
// Exit status: 0 when every assertion holds, 1 when one fails, 2 on errors
// (bad config, unknown experiment, unwritable output).

#include <iostream>

#include <CLI11.hpp>

#include "dirac/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Dirac operators on flat collapsing models"};
    std::string configPath;
    std::string outDir = "out";
    std::optional<std::uint64_t> seed;
    bool verbose = false;
    app.add_option("--config", configPath, "experiment config (INI)")->required();
    app.add_option("--out", outDir, "output directory");
    app.add_option("--seed", seed, "seed for randomized suites (overrides the config)");
    app.add_flag("--verbose", verbose, "print progress and failures");
    CLI11_PARSE(app, argc, argv);

    try {
        const dirac::ExperimentConfig cfg = dirac::load_config(configPath);
        const dirac::RunResult result = dirac::run(cfg, outDir, seed, verbose ? &std::cerr : nullptr);
        if (verbose)
            for (const auto& f : result.files) std::cerr << "wrote " << f.string() << '\n';
        if (!result.pass) {
            for (const auto& f : result.failures) std::cerr << "assertion failed: " << f << '\n';
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
