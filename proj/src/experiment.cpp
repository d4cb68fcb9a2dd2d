#include "dirac/experiment.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "dirac/assembly.hpp"
#include "dirac/block_resolvent.hpp"
#include "dirac/collapse_lab.hpp"

namespace dirac {

namespace {

namespace pt = boost::property_tree;
using nlohmann::json;

/// Accepts plain numbers and multiples of pi: "0.5", "2pi", "-pi", "0.5*pi".
double parse_number(std::string tok) {
    double factor = 1.0;
    if (tok.size() >= 2 && tok.compare(tok.size() - 2, 2, "pi") == 0) {
        factor = kPi;
        tok.erase(tok.size() - 2);
        if (!tok.empty() && tok.back() == '*') tok.pop_back();
        if (tok.empty() || tok == "+") return factor;
        if (tok == "-") return -factor;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw Error("config: cannot parse number '" + tok + "'");
    }
    if (used != tok.size()) throw Error("config: cannot parse number '" + tok + "'");
    return v * factor;
}

std::vector<std::string> tokens(const std::string& s) {
    std::string clean = s;
    for (char& c : clean)
        if (c == ',') c = ' ';
    std::istringstream in(clean);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

std::vector<double> number_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& t : tokens(s)) out.push_back(parse_number(t));
    return out;
}

std::vector<int> int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& t : tokens(s)) {
        const double v = parse_number(t);
        if (v != std::round(v)) throw Error("config: expected an integer, got '" + t + "'");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

template <typename T>
void read_scalar(const pt::ptree& tree, const std::string& key, T& target) {
    const auto v = tree.get_optional<std::string>(key);
    if (!v) return;
    const double x = parse_number(*v);
    if constexpr (std::is_integral_v<T>) {
        if (x != std::round(x)) throw Error("config: " + key + " must be an integer");
        target = static_cast<T>(x);
    } else {
        target = x;
    }
}

int square_side(std::size_t count, const std::string& what) {
    const auto n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(count))));
    if (n < 1 || static_cast<std::size_t>(n * n) != count) throw Error("config: " + what + " must have n*n entries");
    return n;
}

FlatTorusModel make_torus(const ModelConfig& m) {
    const int n = square_side(m.lattice.size(), "lattice");
    FlatTorusModel t;
    t.n = n;
    t.latticeBasis = RMatrix(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) t.latticeBasis(r, c) = m.lattice[static_cast<std::size_t>(r * n + c)];
    t.spinShift = RVector::Zero(n);
    if (!m.shift.empty()) {
        if (static_cast<int>(m.shift.size()) != n) throw Error("config: shift must have n entries");
        for (int k = 0; k < n; ++k) t.spinShift(k) = m.shift[static_cast<std::size_t>(k)];
    }
    t.validate();
    return t;
}

CliffordModule make_module(const std::string& kind, int n) {
    if (kind == "spinor") return spinor_gammas(n);
    if (kind == "exterior") return exterior_module(n);
    throw Error("config: unknown module kind '" + kind + "'");
}

AffineMappingTorus make_mapping_torus(const ModelConfig& m, const CliffordModule& cm) {
    AffineMappingTorus model;
    model.fiber = make_torus(m);
    const int fm = model.fiber.n;
    model.holonomyMatrix = Eigen::MatrixXi::Identity(fm, fm);
    if (!m.holonomy.empty()) {
        if (square_side(m.holonomy.size(), "holonomy") != fm) throw Error("config: holonomy must be m x m");
        for (int r = 0; r < fm; ++r)
            for (int c = 0; c < fm; ++c) model.holonomyMatrix(r, c) = m.holonomy[static_cast<std::size_t>(r * fm + c)];
    }
    if (!m.liftPlane.empty()) {
        if (m.liftPlane.size() != 2) throw Error("config: lift_plane needs two gamma indices");
        model.holonomyLift = m.liftSign * rotation_lift(cm, m.liftPlane[0], m.liftPlane[1], 2.0 * kPi * m.liftAngleTurns);
    } else if (m.liftSign != 1.0) {
        model.holonomyLift = m.liftSign * CMatrix::Identity(cm.dimV, cm.dimV);
    }
    model.baseLength = m.baseLength;
    model.baseSpinShift = m.baseShift;
    model.connectionForm = RVector::Zero(fm);
    if (!m.connection.empty()) {
        if (static_cast<int>(m.connection.size()) != fm) throw Error("config: connection must have m entries");
        for (int k = 0; k < fm; ++k) model.connectionForm(k) = m.connection[static_cast<std::size_t>(k)];
    }
    model.fiberScale = m.epsilons.front();
    model.validate(cm);
    return model;
}

int mapping_dimension(const ModelConfig& m) { return square_side(m.lattice.size(), "lattice") + 1; }

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class Writer {
public:
    Writer(std::filesystem::path dir, RunResult& result) : dir_(std::move(dir)), result_(result) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    void text(const std::string& name, const std::string& body) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        out << body;
        if (!out) throw Error("write failed for " + path.string());
        result_.files.push_back(path);
    }

    void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

private:
    std::filesystem::path dir_;
    RunResult& result_;
};

struct Context {
    const ExperimentConfig& cfg;
    std::uint64_t seed;
    Writer& out;
    RunResult& result;
    std::ostream* log;

    void check(bool ok, const std::string& what) {
        if (ok) return;
        result.pass = false;
        result.failures.push_back(what);
    }
    void note(const std::string& msg) const {
        if (log) *log << msg << '\n';
    }
    json header() const {
        return {{"experiment", cfg.experiment}, {"seed", seed}};
    }
};

void run_torus_spectrum(Context& ctx) {
    const auto& m = ctx.cfg.model;
    const int N = ctx.cfg.numeric.truncation;
    AssembledOperator d, rhs;
    if (m.kind == "torus") {
        const FlatTorusModel model = make_torus(m);
        const CliffordModule cm = make_module(ctx.cfg.moduleKind, model.n);
        d = assemble_dirac(model, cm, N);
        rhs = bochner_rhs(model, cm, N);
    } else {
        const CliffordModule cm = make_module(ctx.cfg.moduleKind, mapping_dimension(m));
        const AffineMappingTorus model = make_mapping_torus(m, cm);
        d = assemble_dirac(model, cm, N, ctx.cfg.numeric.baseTruncation);
        rhs = bochner_rhs(model, cm, N, ctx.cfg.numeric.baseTruncation);
    }
    const Spectrum s = eigensolve(d);
    ctx.out.text("spectrum.csv", to_csv(s));
    json j = ctx.header();
    j["dimension"] = d.dimension();
    j["reliableLevel"] = d.reliableLevel;
    j["hermitianResidual"] = d.hermitianResidual();
    j["bochnerResidual"] = bochner_residual(d, rhs);
    ctx.check(d.hermitianResidual() <= 1e-12, "operator is not Hermitian to 1e-12");
    ctx.check(j["bochnerResidual"].get<double>() <= ctx.cfg.numeric.residualTol, "Bochner residual above tolerance");
    j["pass"] = ctx.result.pass;
    ctx.out.json_file("residuals.json", j);
    ctx.note("torus_spectrum: " + std::to_string(s.size()) + " eigenvalues");
}

CollapseSettings collapse_settings(const NumericConfig& n) {
    CollapseSettings s;
    s.kMax = n.kMax;
    s.N = n.truncation;
    s.baseTruncation = n.baseTruncation;
    s.window = n.window;
    s.matchTol = n.matchTol;
    return s;
}

void run_window_test(Context& ctx) {
    const auto& m = ctx.cfg.model;
    const CliffordModule cm = make_module(ctx.cfg.moduleKind, mapping_dimension(m));
    const AffineMappingTorus model = make_mapping_torus(m, cm);
    const CollapseReport r = collapse_run(model, cm, m.epsilons, collapse_settings(ctx.cfg.numeric));
    ctx.check(r.verdict == Verdict::converges, "window test needs affine-parallel sections");
    for (std::size_t e = 0; e < r.epsilons.size(); ++e)
        ctx.out.text("spectrum_eps" + std::to_string(e) + ".csv", to_csv(r.spectraPerEps[e]));
    if (r.limitSpectrum) ctx.out.text("limit_spectrum.csv", to_csv(*r.limitSpectrum));

    json j = ctx.header();
    j["epsilons"] = r.epsilons;
    j["windowBounds"] = r.windowBounds;
    j["windowChecks"] = to_json(r)["windowChecks"];
    j["windowCountNondecreasing"] = r.windowCountNondecreasing;
    for (std::size_t e = 0; e < r.windowChecks.size(); ++e)
        ctx.check(r.windowChecks[e].equal, "window mismatch at eps = " + fmt(r.epsilons[e]));
    ctx.check(r.windowCountNondecreasing, "matched count decreased along the eps list");
    j["pass"] = ctx.result.pass;
    ctx.out.json_file("window.json", j);
}

void run_collapse(Context& ctx) {
    const auto& m = ctx.cfg.model;
    const auto& num = ctx.cfg.numeric;
    const CliffordModule cm = make_module(ctx.cfg.moduleKind, mapping_dimension(m));
    const AffineMappingTorus model = make_mapping_torus(m, cm);
    const CollapseReport r = collapse_run(model, cm, m.epsilons, collapse_settings(num));
    json j = to_json(r);
    j["experiment"] = ctx.cfg.experiment;
    j["seed"] = ctx.seed;
    if (r.verdict == Verdict::converges) {
        ctx.check(r.windowPass(), "spectral window comparison failed");
        for (std::size_t k = 0; k < r.trackingErrors.size(); ++k) {
            const auto& err = r.trackingErrors[k];
            for (std::size_t e = 1; e < err.size(); ++e)
                ctx.check(err[e] <= err[e - 1] + 1e-9,
                          "lambda_" + std::to_string(k + 1) + " error grew at eps = " + fmt(r.epsilons[e]));
        }
        const AssembledOperator limit = limit_operator(model, cm, num.baseTruncation);
        const int k = std::min<int>(num.kMax, static_cast<int>(limit.dimension()));
        const MinimaxReport mm = minimax_check(limit, k, num.trials, ctx.seed);
        j["minimax"] = {{"k", k}, {"trials", mm.trials}, {"violations", mm.violations}, {"minMargin", mm.minMargin}};
        ctx.check(mm.violations == 0, "minimax characterization violated");
    }
    j["pass"] = ctx.result.pass;
    ctx.out.json_file("collapse_report.json", j);
    ctx.out.text("collapse.csv", tracked_csv(r));
}

void run_blowup(Context& ctx) {
    const auto& m = ctx.cfg.model;
    const CliffordModule cm = make_module(ctx.cfg.moduleKind, mapping_dimension(m));
    const AffineMappingTorus model = make_mapping_torus(m, cm);
    const BlowupReport r = blowup_check(model, cm, m.epsilons, ctx.cfg.numeric.truncation, ctx.cfg.numeric.baseTruncation);
    json j = to_json(r);
    j["experiment"] = ctx.cfg.experiment;
    j["seed"] = ctx.seed;
    j["minRate"] = ctx.cfg.numeric.minRate;
    ctx.check(r.rate >= ctx.cfg.numeric.minRate, "blow-up rate " + fmt(r.rate) + " below " + fmt(ctx.cfg.numeric.minRate));
    j["pass"] = ctx.result.pass;
    ctx.out.json_file("blowup.json", j);
    std::string csv = "epsilon,min_abs_lambda,eps_times_min\n";
    for (std::size_t e = 0; e < r.epsilons.size(); ++e)
        csv += fmt(r.epsilons[e]) + "," + fmt(r.minAbs[e]) + "," + fmt(r.epsilons[e] * r.minAbs[e]) + "\n";
    ctx.out.text("blowup.csv", csv);
}

struct RandomPath {
    RMatrix m0, m1;
    RVector shift;
};

/// G(t) = M(t)^T M(t) with M(t) = M0 + t M1, kept when det M stays away from 0.
RandomPath random_path(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> diag(0.7, 1.5), off(-0.2, 0.2), drift(-0.5, 0.5);
    std::bernoulli_distribution coin(0.5);
    while (true) {
        RandomPath p{RMatrix(n, n), RMatrix(n, n), RVector(n)};
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                p.m0(r, c) = r == c ? diag(rng) : off(rng);
                p.m1(r, c) = drift(rng);
            }
        for (int k = 0; k < n; ++k) p.shift(k) = coin(rng) ? 0.5 : 0.0;
        bool ok = true;
        for (int s = 0; s <= 20 && ok; ++s) ok = std::abs((p.m0 + (s / 20.0) * p.m1).determinant()) > 0.2;
        if (ok) return p;
    }
}

GramFamily family_of(const RandomPath& p) {
    return [p](double t) {
        const RMatrix m = p.m0 + t * p.m1;
        return RMatrix(m.transpose() * m);
    };
}

json matrix_json(const RMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        rows.push_back(row);
    }
    return rows;
}

void run_perturbation(Context& ctx) {
    const auto& num = ctx.cfg.numeric;
    const CliffordModule cm = make_module(ctx.cfg.moduleKind, num.dimension);
    std::mt19937_64 rng(ctx.seed);
    json j = ctx.header();
    j["K"] = num.K;
    j["C"] = num.C;
    j["trials"] = num.trials;
    double worst = 0.0;
    json offending = json::array();
    std::vector<double> ratios;
    for (int t = 0; t < num.trials; ++t) {
        const RandomPath p = random_path(rng, num.dimension);
        const PerturbationReport r =
            perturbation_bound_check(family_of(p), cm, p.shift, num.K, num.truncation, num.samples, num.C);
        ratios.push_back(r.maxObservedRatio);
        worst = std::max(worst, r.maxObservedRatio);
        if (!r.pass) {
            offending.push_back({{"trial", t}, {"m0", matrix_json(p.m0)}, {"m1", matrix_json(p.m1)},
                                 {"shift", std::vector<double>(p.shift.data(), p.shift.data() + p.shift.size())},
                                 {"ratio", r.maxObservedRatio}});
            ctx.check(false, "bound violated on trial " + std::to_string(t));
        }
    }
    j["maxObservedRatio"] = worst;
    j["ratios"] = ratios;
    j["offendingPaths"] = offending;
    j["pass"] = ctx.result.pass;
    ctx.out.json_file("perturbation.json", j);
}

void run_frame_bundle(Context& ctx) {
    const FlatTorusModel model = make_torus(ctx.cfg.model);
    const CliffordModule cm = make_module(ctx.cfg.moduleKind, model.n);
    const FrameBundleSpectra fb = frame_bundle_operator(model, cm, ctx.cfg.numeric.truncation, ctx.cfg.numeric.groupTruncation);
    const Matching match = epsilon_close(fb.diracSquared, fb.laplacianMinusCasimir, 1e-8);
    ctx.out.text("dirac_squared.csv", to_csv(fb.diracSquared));
    ctx.out.text("laplacian_minus_casimir.csv", to_csv(fb.laplacianMinusCasimir));
    json j = ctx.header();
    j["cV"] = fb.cV;
    j["invariantDim"] = fb.invariantDim;
    j["diracSquaredSize"] = fb.diracSquared.size();
    j["laplacianSize"] = fb.laplacianMinusCasimir.size();
    j["maxDeviation"] = match.maxDeviation;
    ctx.check(match.close, "frame-bundle spectra differ");
    j["pass"] = ctx.result.pass;
    ctx.out.json_file("frame_bundle.json", j);
}

CMatrix random_complex(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CMatrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k) m(i, k) = scale * Complex(u(rng), u(rng));
    return m;
}

CMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
    const CMatrix a = random_complex(rng, n, n, 1.0);
    return 0.5 * (a + a.adjoint());
}

void run_block_identities(Context& ctx) {
    const auto& num = ctx.cfg.numeric;
    const Eigen::Index p = num.blockSize, q = num.blockSize;
    std::mt19937_64 rng(ctx.seed);
    const double shifts[] = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    json trials = json::array();
    double worstSchur = 0.0, worstFactor = 0.0, worstNeumann = 0.0;
    for (int b = 0; b < num.blocks; ++b) {
        const double k = shifts[b % 7];
        const CMatrix bb = random_complex(rng, p, q, 0.5);
        BlockMatrix2x2 m;
        m.alpha = random_hermitian(rng, p) + Complex(0.0, k) * CMatrix::Identity(p, p);
        m.beta = bb;
        m.gamma = bb.adjoint();
        m.delta = random_hermitian(rng, q) + Complex(0.0, k) * CMatrix::Identity(q, q);
        const CMatrix dense = m.dense();
        const CMatrix inv = schur_inverse(m).dense();
        const CMatrix id = CMatrix::Identity(p + q, p + q);
        const double schurRes = std::max(max_abs(dense * inv - id), max_abs(inv * dense - id));
        const NeumannReport nr = neumann_factorization_check(m, k);
        const bool verdictOk = !(nr.contractionNorm < 0.99) || (nr.directlyInvertible && nr.inverseResidual <= 1e-9);
        worstSchur = std::max(worstSchur, schurRes);
        worstFactor = std::max(worstFactor, nr.factorizationResidual);
        if (nr.invertible) worstNeumann = std::max(worstNeumann, nr.inverseResidual);
        ctx.check(schurRes <= num.residualTol, "Schur inverse residual above tolerance on block " + std::to_string(b));
        ctx.check(nr.factorizationResidual <= num.residualTol, "Neumann factorization residual above tolerance on block " + std::to_string(b));
        ctx.check(verdictOk, "invertibility verdict disagrees with direct inversion on block " + std::to_string(b));
        trials.push_back({{"shift", k},
                          {"schurResidual", schurRes},
                          {"factorizationResidual", nr.factorizationResidual},
                          {"contractionNorm", nr.contractionNorm},
                          {"invertible", nr.invertible},
                          {"directlyInvertible", nr.directlyInvertible},
                          {"neumannInverseResidual", nr.inverseResidual}});
    }
    json j = ctx.header();
    j["blocks"] = num.blocks;
    j["blockSize"] = num.blockSize;
    j["maxSchurResidual"] = worstSchur;
    j["maxFactorizationResidual"] = worstFactor;
    j["maxNeumannInverseResidual"] = worstNeumann;
    j["trials"] = trials;
    j["pass"] = ctx.result.pass;
    ctx.out.json_file("residuals.json", j);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"torus_spectrum", "window_test",  "collapse",        "blowup",
                                                "perturbation",   "frame_bundle", "block_identities"};
    return names;
}

void ExperimentConfig::validate() const {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end())
        throw Error("unknown experiment '" + experiment + "'");
    if (model.kind != "torus" && model.kind != "mapping_torus")
        throw Error("config: model kind must be torus or mapping_torus");
    if (model.epsilons.empty()) throw Error("config: epsilons must not be empty");
    for (std::size_t k = 0; k < model.epsilons.size(); ++k) {
        if (!(model.epsilons[k] > 0.0)) throw Error("config: epsilons must be positive");
        if (k > 0 && !(model.epsilons[k] < model.epsilons[k - 1])) throw Error("config: epsilons must be decreasing");
    }
    const auto& n = numeric;
    if (!(n.matchTol > 0.0) || !(n.residualTol > 0.0) || !(n.K > 0.0) || !(n.C > 0.0) || !(n.window.A > 0.0) ||
        n.window.C < 0.0)
        throw Error("config: tolerances and constants must be positive");
    if (n.truncation < 1 || n.baseTruncation < 1 || n.kMax < 1 || n.samples < 2 || n.trials < 1 || n.blocks < 1 ||
        n.blockSize < 1 || n.dimension < 1)
        throw Error("config: integer parameters out of range");
    const bool needsMapping = experiment == "window_test" || experiment == "collapse" || experiment == "blowup";
    if (needsMapping && model.kind != "mapping_torus") throw Error("config: " + experiment + " needs a mapping_torus model");
    if (experiment == "frame_bundle" && model.kind != "torus") throw Error("config: frame_bundle needs a torus model");
}

ExperimentConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(std::string("config: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.experiment = tree.get<std::string>("experiment.name", "");
    read_scalar(tree, "experiment.seed", cfg.seed);
    cfg.moduleKind = tree.get<std::string>("module.kind", cfg.moduleKind);

    auto& m = cfg.model;
    m.kind = tree.get<std::string>("model.kind", m.kind);
    if (auto v = tree.get_optional<std::string>("model.lattice")) m.lattice = number_list(*v);
    if (auto v = tree.get_optional<std::string>("model.shift")) m.shift = number_list(*v);
    if (auto v = tree.get_optional<std::string>("model.holonomy")) m.holonomy = int_list(*v);
    if (auto v = tree.get_optional<std::string>("model.lift_plane")) m.liftPlane = int_list(*v);
    read_scalar(tree, "model.lift_angle_turns", m.liftAngleTurns);
    read_scalar(tree, "model.lift_sign", m.liftSign);
    read_scalar(tree, "model.base_length", m.baseLength);
    read_scalar(tree, "model.base_shift", m.baseShift);
    if (auto v = tree.get_optional<std::string>("model.connection")) m.connection = number_list(*v);
    if (auto v = tree.get_optional<std::string>("model.epsilons")) m.epsilons = number_list(*v);

    auto& n = cfg.numeric;
    read_scalar(tree, "numeric.truncation", n.truncation);
    read_scalar(tree, "numeric.base_truncation", n.baseTruncation);
    read_scalar(tree, "numeric.k_max", n.kMax);
    read_scalar(tree, "numeric.match_tol", n.matchTol);
    read_scalar(tree, "numeric.window_A", n.window.A);
    read_scalar(tree, "numeric.window_C", n.window.C);
    read_scalar(tree, "numeric.K", n.K);
    read_scalar(tree, "numeric.C_bound", n.C);
    read_scalar(tree, "numeric.samples", n.samples);
    read_scalar(tree, "numeric.trials", n.trials);
    read_scalar(tree, "numeric.dimension", n.dimension);
    read_scalar(tree, "numeric.group_truncation", n.groupTruncation);
    read_scalar(tree, "numeric.blocks", n.blocks);
    read_scalar(tree, "numeric.block_size", n.blockSize);
    read_scalar(tree, "numeric.residual_tol", n.residualTol);
    read_scalar(tree, "numeric.min_rate", n.minRate);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    return parse_config(in);
}

RunResult run(const ExperimentConfig& config, const std::filesystem::path& outDir,
              std::optional<std::uint64_t> seedOverride, std::ostream* log) {
    config.validate();
    RunResult result;
    Writer writer(outDir, result);
    Context ctx{config, seedOverride.value_or(config.seed), writer, result, log};
    const std::string& e = config.experiment;
    if (e == "torus_spectrum") {
        run_torus_spectrum(ctx);
    } else if (e == "window_test") {
        run_window_test(ctx);
    } else if (e == "collapse") {
        run_collapse(ctx);
    } else if (e == "blowup") {
        run_blowup(ctx);
    } else if (e == "perturbation") {
        run_perturbation(ctx);
    } else if (e == "frame_bundle") {
        run_frame_bundle(ctx);
    } else {
        run_block_identities(ctx);
    }
    for (const auto& f : result.failures) ctx.note("FAIL: " + f);
    return result;
}

}  // namespace dirac
