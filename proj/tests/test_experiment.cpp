#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <json.hpp>

#include "dirac/experiment.hpp"

using namespace dirac;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = DIRAC_CONFIG_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const char* exe = std::getenv("DIRAC_RUN");
    REQUIRE(exe != nullptr);
    const int status = std::system((std::string(exe) + " " + args + " 2>/dev/null").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

}  // namespace

TEST_CASE("config parsing") {
    const ExperimentConfig c = parse(
        "[experiment]\nname = window_test\nseed = 11\n"
        "[model]\nkind = mapping_torus\nlattice = 2pi\nbase_length = 0.5*pi\nbase_shift = 0.5\n"
        "connection = -0.3\nepsilons = 1, 0.5 0.25\n"
        "[numeric]\nbase_truncation = 12\nwindow_C = 0\n");
    CHECK(c.experiment == "window_test");
    CHECK(c.seed == 11);
    CHECK(c.model.lattice.front() == doctest::Approx(2.0 * kPi));
    CHECK(c.model.baseLength == doctest::Approx(0.5 * kPi));
    CHECK(c.model.connection.front() == -0.3);
    CHECK(c.model.epsilons == std::vector<double>{1.0, 0.5, 0.25});
    CHECK(c.numeric.baseTruncation == 12);
    CHECK(c.numeric.window.C == 0.0);
    CHECK(c.numeric.truncation == NumericConfig{}.truncation);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse("[experiment]\nname = nonsense\n"), Error);
    CHECK_THROWS_AS(parse("[experiment]\nname = collapse\n"), Error);  // needs a mapping torus
    CHECK_THROWS_AS(parse("[experiment]\nname = torus_spectrum\n[model]\nepsilons = 0.5 1\n"), Error);
    CHECK_THROWS_AS(parse("[experiment]\nname = torus_spectrum\n[model]\nlattice = 2pie\n"), Error);
    CHECK_THROWS_AS(parse("[experiment]\nname = torus_spectrum\n[model]\nholonomy = 0.5\n"), Error);
    CHECK_THROWS_AS(parse("[experiment]\nname = torus_spectrum\n[numeric]\ntruncation = 0\n"), Error);
}

TEST_CASE("every shipped config runs, passes and is deterministic") {
    std::vector<fs::path> configs;
    for (const auto& e : fs::directory_iterator(kConfigs))
        if (e.path().extension() == ".ini") configs.push_back(e.path());
    std::sort(configs.begin(), configs.end());
    REQUIRE(configs.size() >= experiment_names().size());
    const fs::path root = fs::temp_directory_path() / "dirac_test_experiment";
    fs::remove_all(root);
    for (const auto& cfg : configs) {
        CAPTURE(cfg.filename().string());
        const fs::path a = root / (cfg.stem().string() + "_a"), b = root / (cfg.stem().string() + "_b");
        CHECK(run_cli("--config " + cfg.string() + " --out " + a.string()) == 0);
        CHECK(run_cli("--config " + cfg.string() + " --out " + b.string()) == 0);
        std::size_t files = 0;
        for (const auto& f : fs::directory_iterator(a)) {
            ++files;
            CHECK(slurp(f.path()) == slurp(b / f.path().filename()));
            if (f.path().extension() == ".json") CHECK(nlohmann::json::parse(slurp(f.path())).at("pass") == true);
        }
        CHECK(files > 0);
    }
    fs::remove_all(root);
}

TEST_CASE("seed override changes randomized output only") {
    const fs::path root = fs::temp_directory_path() / "dirac_test_seed";
    fs::remove_all(root);
    const std::string cfg = (kConfigs / "block_identities.ini").string();
    REQUIRE(run_cli("--config " + cfg + " --out " + (root / "a").string()) == 0);
    REQUIRE(run_cli("--config " + cfg + " --out " + (root / "b").string() + " --seed 7") == 0);
    REQUIRE(run_cli("--config " + cfg + " --out " + (root / "c").string() + " --seed 8") == 0);
    CHECK(slurp(root / "a" / "residuals.json") == slurp(root / "b" / "residuals.json"));
    CHECK(slurp(root / "a" / "residuals.json") != slurp(root / "c" / "residuals.json"));
    fs::remove_all(root);
}

TEST_CASE("exit codes") {
    const fs::path bad = fs::temp_directory_path() / "dirac_bad.ini";
    std::ofstream(bad) << "[experiment]\nname = not_an_experiment\n";
    CHECK(run_cli("--config " + bad.string()) == 2);
    CHECK(run_cli("--config /nonexistent/config.ini") == 2);
    fs::remove(bad);

    const fs::path failing = fs::temp_directory_path() / "dirac_failing.ini";
    // a rate no half-shifted fiber can reach
    std::ofstream(failing) << "[experiment]\nname = blowup\n[model]\nkind = mapping_torus\nlattice = 2pi\n"
                              "shift = 0.5\nepsilons = 1 0.5\n[numeric]\nmin_rate = 10\n";
    const fs::path out = fs::temp_directory_path() / "dirac_failing_out";
    CHECK(run_cli("--config " + failing.string() + " --out " + out.string()) == 1);
    fs::remove(failing);
    fs::remove_all(out);
}
