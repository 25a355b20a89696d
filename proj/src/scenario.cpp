#include "rhodich/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "rhodich/adapted.hpp"
#include "rhodich/csv.hpp"
#include "rhodich/dichotomy.hpp"
#include "rhodich/green.hpp"
#include "rhodich/robust.hpp"

namespace rhodich {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::vector<double> linspace(double lo, double hi, size_t n) {
    std::vector<double> g(n);
    for (size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

const std::vector<std::string> kStages = {"validate", "detect",     "adapt",
                                          "probe_y1", "probe_yinf", "perturb"};

struct StageContext {
    Fixture fx;
    ScenarioConfig cfg;
    std::string out_dir;
    double T_max;
    unsigned seed;
    std::shared_ptr<DichotomyCertificate> cert;  // set by detect
    std::vector<std::string>* files;
};

std::ofstream open_report(StageContext& ctx, const std::string& name) {
    std::string path = ctx.out_dir + "/" + name;
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write report file: " + path);
    ctx.files->push_back(path);
    out << "# rhodich report: " << name << "\n";
    out << "# fixture: " << ctx.fx.name << "  seed: " << ctx.seed << "\n";
    return out;
}

StageOutcome stage_validate(StageContext& ctx) {
    auto grid = linspace(0.0, ctx.T_max, 101);
    RateValidationReport rr = validate_rate(ctx.fx.rate, grid);

    std::mt19937 rng(ctx.seed + 11);
    std::uniform_real_distribution<double> uni(0.0, ctx.T_max);
    std::vector<std::array<double, 3>> triples;
    for (int i = 0; i < 100; ++i) {
        std::array<double, 3> tr = {uni(rng), uni(rng), uni(rng)};
        std::sort(tr.begin(), tr.end());
        std::swap(tr[0], tr[2]);  // t >= s >= tau ordering
        triples.push_back(tr);
    }
    double cres = cocycle_residual(ctx.fx.family, triples);

    auto probes = sample_probes(ctx.fx.family.dim(), 4, ctx.seed + 13);
    NormBoundsEstimate nb = norm_bounds_estimate(ctx.fx.norms, ctx.fx.rate, grid, probes);

    // discontinuous propagators are only piecewise cocycles on the cells, so
    // the residual check is informative rather than binding for them
    double cocycle_tol = ctx.fx.family.is_ode() ? 1e-5 : 1e-10;
    bool cocycle_ok = ctx.fx.discontinuous || cres <= cocycle_tol;
    bool pass = rr.pass && cocycle_ok;

    auto out = open_report(ctx, "validate.txt");
    out << "rate_pass " << (rr.pass ? 1 : 0) << "\n";
    out << "rate_rho0_offset " << fmt(rr.rho0_offset) << "\n";
    out << "rate_min_deriv " << fmt(rr.min_deriv) << "\n";
    out << "cocycle_residual " << fmt(cres) << "\n";
    out << "norm_C " << fmt(nb.C) << "\n";
    out << "norm_eps " << fmt(nb.eps) << "\n";

    std::ofstream csv(ctx.out_dir + "/validate_rate.csv");
    ctx.files->push_back(ctx.out_dir + "/validate_rate.csv");
    csv << "t,rho,rho_deriv\n";
    for (double t : grid)
        csv << fmt(t) << "," << fmt(ctx.fx.rate(t)) << ","
            << fmt(ctx.fx.rate.deriv(t)) << "\n";

    std::ostringstream detail;
    detail << "rate " << (rr.pass ? "ok" : "BAD") << ", cocycle residual "
           << fmt(cres);
    return {"validate", pass, detail.str()};
}

StageOutcome stage_detect(StageContext& ctx) {
    DetectOptions det;
    det.T_max = ctx.T_max;
    det.nodes = ctx.cfg.get_size("detect.nodes", 201);
    det.rho_span = ctx.cfg.get_double("detect.rho_span", 6.0);
    det.gap_margin = ctx.cfg.get_double("detect.gap_margin", 0.2);
    det.pair_count = ctx.cfg.get_size("detect.pairs", 60);
    det.probe_count = ctx.cfg.get_size("detect.probes", 6);
    det.seed = ctx.seed;

    bool expect = ctx.fx.expect_dichotomy;
    if (ctx.cfg.has("expect.dichotomy"))
        expect = ctx.cfg.get("expect.dichotomy", "") == "true";

    auto out = open_report(ctx, "detect.txt");
    std::string verdict;
    bool found = false;
    try {
        DichotomyCertificate cert = detect_dichotomy(
            ctx.fx.family, ctx.fx.Z, ctx.fx.norms, ctx.fx.rate, det);
        auto pairs = sample_time_pairs(ctx.T_max, det.pair_count, ctx.seed + 1);
        auto probes = sample_probes(ctx.fx.family.dim(), det.probe_count,
                                    ctx.seed + 2);
        VerifyReport vr = verify_dichotomy(ctx.fx.family, cert, ctx.fx.norms,
                                           ctx.fx.rate, pairs, probes);
        found = vr.pass;
        out << "lambda " << fmt(cert.lambda) << "\n";
        out << "D " << fmt(cert.D) << "\n";
        out << "M " << fmt(cert.M) << "\n";
        out << "verify_pass " << (vr.pass ? 1 : 0) << "\n";
        out << "d1_slack " << fmt(vr.diagnostics.d1_slack) << "\n";
        out << "d2_slack " << fmt(vr.diagnostics.d2_slack) << "\n";
        out << "commute_residual " << fmt(vr.diagnostics.commute_residual) << "\n";
        if (vr.pass) {
            ctx.cert = std::make_shared<DichotomyCertificate>(std::move(cert));
            std::ofstream cf(ctx.out_dir + "/certificate.txt");
            ctx.files->push_back(ctx.out_dir + "/certificate.txt");
            cf << certificate_to_text(*ctx.cert);
            verdict = "dichotomy, lambda " + fmt(ctx.cert->lambda) + ", D " +
                      fmt(ctx.cert->D);
        } else {
            verdict = "certificate failed verification";
        }
    } catch (const Error& e) {
        out << "verdict no_dichotomy\n";
        out << "reason " << e.what() << "\n";
        verdict = std::string("no dichotomy (") + e.what() + ")";
    }
    out << "expected " << (expect ? 1 : 0) << "\n";
    out << "found " << (found ? 1 : 0) << "\n";
    return {"detect", found == expect, verdict};
}

StageOutcome stage_adapt(StageContext& ctx) {
    if (!ctx.cert)
        return {"adapt", false, "no verified certificate (run detect first)"};
    AdaptedNormOptions opt;
    opt.lambda = ctx.cfg.get_double("adapt.lambda", 0.0);
    opt.H_sup = ctx.cfg.get_double("adapt.h_sup", 8.0);
    AdaptedNormFamily adapted(ctx.fx.family, ctx.cert, ctx.fx.rate, opt);

    auto pairs = sample_time_pairs(ctx.T_max, 24, ctx.seed + 3);
    auto probes = sample_probes(ctx.fx.family.dim(), 4, ctx.seed + 4);
    double tol = ctx.cfg.get_double("adapt.tolerance", 1.05);
    UniformityReport ur = adapted_uniformity_check(ctx.fx.family, *ctx.cert,
                                                   ctx.fx.rate, adapted, pairs,
                                                   probes, tol);
    auto grid = linspace(0.0, ctx.T_max, 41);
    EquivalenceReport er = adapted_equivalence_check(ctx.fx.family, *ctx.cert,
                                                     ctx.fx.rate, adapted, grid,
                                                     probes);

    auto out = open_report(ctx, "adapt.txt");
    out << "lambda " << fmt(adapted.lambda()) << "\n";
    out << "uniformity_pass " << (ur.pass ? 1 : 0) << "\n";
    out << "worst_forward_ratio " << fmt(ur.worst_forward_ratio) << "\n";
    out << "worst_backward_ratio " << fmt(ur.worst_backward_ratio) << "\n";
    out << "equivalence_pass " << (er.pass ? 1 : 0) << "\n";
    out << "C_hat " << fmt(er.C_hat) << "\n";
    out << "eps_hat " << fmt(er.eps_hat) << "\n";

    std::ostringstream detail;
    detail << "uniformity ratio " << fmt(std::max(ur.worst_forward_ratio,
                                                  ur.worst_backward_ratio))
           << ", C_hat " << fmt(er.C_hat);
    return {"adapt", ur.pass && er.pass, detail.str()};
}

StageOutcome stage_probe(StageContext& ctx, AdmissibilityPair pair) {
    const bool y1 = pair == AdmissibilityPair::Y1;
    auto suite = y1 ? bundled_suite_y1(ctx.fx.family.dim(), ctx.T_max)
                    : bundled_suite_yinf(ctx.fx.family.dim(), ctx.T_max);
    ProbeOptions opt;
    opt.budget = ctx.cfg.get_double("probe.budget", 1e6);
    AdmissibilityReport rep = admissibility_probe(ctx.fx.family, ctx.fx.Z,
                                                  ctx.fx.norms, ctx.fx.rate,
                                                  suite, pair, opt);
    bool expect = y1 ? ctx.fx.expect_y1_admissible : ctx.fx.expect_yinf_admissible;
    std::string key = y1 ? "expect.y1" : "expect.yinf";
    if (ctx.cfg.has(key)) expect = ctx.cfg.get(key, "") == "true";

    std::string name = y1 ? "probe_y1" : "probe_yinf";
    auto out = open_report(ctx, name + ".txt");
    out << "solvable " << (rep.solvable ? 1 : 0) << "\n";
    out << "bound_estimate " << fmt(rep.bound_estimate) << "\n";
    out << "uniqueness_margin " << fmt(rep.uniqueness_margin) << "\n";
    out << "budget " << fmt(opt.budget) << "\n";
    out << "witnesses";
    for (size_t w : rep.witnesses) out << " " << w;
    out << "\n";

    std::ofstream csv(ctx.out_dir + "/" + name + ".csv");
    ctx.files->push_back(ctx.out_dir + "/" + name + ".csv");
    csv << "input_index,candidate_sup\n";
    for (size_t i = 0; i < rep.candidate_sups.size(); ++i)
        csv << i << "," << fmt(rep.candidate_sups[i]) << "\n";

    std::ostringstream detail;
    detail << (rep.solvable ? "solvable" : "unsolvable") << ", bound "
           << fmt(rep.bound_estimate);
    return {name, rep.solvable == expect, detail.str()};
}

StageOutcome stage_perturb(StageContext& ctx) {
    PerturbationFamily B;
    B.delta = ctx.cfg.get_double("perturb.delta", 0.05);
    B.a = ctx.cfg.get_double("perturb.a", 1.0);
    B.eps = ctx.cfg.get_double("perturb.eps", 0.0);
    const int d = ctx.fx.family.dim();
    RateFunction rate = ctx.fx.rate;
    double delta = B.delta, a = B.a, eps = B.eps;
    B.B = [d, rate, delta, a, eps](double t) -> MatrixXd {
        return delta * std::exp(-(eps + a) * rate(t)) * rate.deriv(t) *
               MatrixXd::Identity(d, d);
    };

    RobustnessConfig rc;
    rc.T_max = ctx.T_max;
    rc.detect_nodes = ctx.cfg.get_size("detect.nodes", 201);
    rc.horizon = ctx.cfg.get_double("perturb.horizon",
                                    ctx.cfg.get_double("detect.rho_span", 6.0));
    rc.gap_margin = ctx.cfg.get_double("detect.gap_margin", 0.2);
    rc.pair_count = ctx.cfg.get_size("detect.pairs", 60);
    rc.probe_count = ctx.cfg.get_size("detect.probes", 6);
    rc.seed = ctx.seed;
    rc.picard.tol = ctx.cfg.get_double("picard.tol", 1e-10);
    rc.picard.max_iters = static_cast<int>(ctx.cfg.get_size("picard.max_iters", 60));
    rc.picard.nodes_per_unit =
        static_cast<int>(ctx.cfg.get_size("picard.nodes_per_unit", 400));

    RobustnessReport rep = robustness_experiment(ctx.fx.family, B, ctx.fx.Z,
                                                 ctx.fx.norms, ctx.fx.rate, rc);
    double lambda_min = ctx.cfg.get_double("perturb.lambda_min", 0.0);

    auto out = open_report(ctx, "perturb.txt");
    out << "delta " << fmt(B.delta) << "\n";
    out << "a " << fmt(B.a) << "\n";
    out << "lambda_before " << fmt(rep.before.lambda) << "\n";
    out << "lambda_after " << fmt(rep.after.lambda) << "\n";
    out << "D_before " << fmt(rep.before.D) << "\n";
    out << "D_after " << fmt(rep.after.D) << "\n";
    out << "lambda_drop " << fmt(rep.lambda_drop) << "\n";
    out << "D_growth " << fmt(rep.D_growth) << "\n";
    out << "stable_angle " << fmt(rep.stable_angle) << "\n";
    out << "mild_identity_residual " << fmt(rep.mild_identity_residual) << "\n";

    std::ostringstream detail;
    detail << "lambda " << fmt(rep.before.lambda) << " -> "
           << fmt(rep.after.lambda);
    return {"perturb", rep.after.lambda > lambda_min, detail.str()};
}

}  // namespace

std::string ScenarioConfig::get(const std::string& key,
                                const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

std::string ScenarioConfig::require(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end())
        throw ConfigError("missing required config key '" + key + "' in " +
                          source_path);
    return it->second;
}

double ScenarioConfig::get_double(const std::string& key, double fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not a number: " +
                          it->second);
    }
}

size_t ScenarioConfig::get_size(const std::string& key, size_t fallback) const {
    double v = get_double(key, static_cast<double>(fallback));
    if (v < 0.0 || v != std::floor(v))
        throw ConfigError("config key '" + key +
                          "' must be a nonnegative integer");
    return static_cast<size_t>(v);
}

ScenarioConfig parse_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ScenarioConfig cfg;
    cfg.source_path = path;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << path << ":" << lineno << ": expected key = value";
            throw ConfigError(os.str());
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream os;
            os << path << ":" << lineno << ": empty key";
            throw ConfigError(os.str());
        }
        cfg.kv[key] = val;
    }
    return cfg;
}

std::vector<SampledFunction> bundled_suite_y1(int dim, double T_max) {
    std::vector<SampledFunction> suite;
    VectorXd e0 = VectorXd::Unit(dim, 0);
    VectorXd el = VectorXd::Unit(dim, dim - 1);
    size_t n = static_cast<size_t>(std::max(2001.0, 100.0 * T_max + 1.0));
    SampledFunction smooth = SampledFunction::from_function(
        [e0](double t) { return VectorXd(std::exp(-0.5 * t) * e0); }, T_max, n);
    smooth.annotate_decay(0.5);
    suite.push_back(std::move(smooth));
    suite.push_back(SampledFunction::indicator(1.0, std::min(2.0, T_max), e0,
                                               T_max, n));
    suite.push_back(SampledFunction::indicator(0.0, std::min(3.0, T_max), el,
                                               T_max, n));
    return suite;
}

std::vector<SampledFunction> bundled_suite_yinf(int dim, double T_max) {
    std::vector<SampledFunction> suite;
    VectorXd e0 = VectorXd::Unit(dim, 0);
    VectorXd el = VectorXd::Unit(dim, dim - 1);
    size_t n = static_cast<size_t>(std::max(2001.0, 100.0 * T_max + 1.0));
    suite.push_back(SampledFunction::from_function(
        [e0](double) { return VectorXd(e0); }, T_max, n));
    SampledFunction decaying = SampledFunction::from_function(
        [el](double t) { return VectorXd(std::exp(-0.25 * t) * el); }, T_max, n);
    decaying.annotate_decay(0.25);
    suite.push_back(std::move(decaying));
    suite.push_back(SampledFunction::indicator(1.0, std::min(2.0, T_max), e0,
                                               T_max, n));
    return suite;
}

ScenarioResult run_scenario(const std::string& config_path,
                            const std::string& output_root_override) {
    ScenarioResult result;
    ScenarioConfig cfg;
    std::vector<std::string> pipeline;
    Fixture fx;
    try {
        cfg = parse_scenario_config(config_path);

        std::string stages = cfg.require("pipeline");
        std::stringstream ss(stages);
        std::string stage;
        while (std::getline(ss, stage, ',')) {
            stage = trim(stage);
            if (stage.empty()) continue;
            if (std::find(kStages.begin(), kStages.end(), stage) == kStages.end())
                throw ConfigError("unknown stage '" + stage + "'");
            pipeline.push_back(stage);
        }
        if (pipeline.empty()) throw ConfigError("pipeline has no stages");

        try {
            fx = builtin_fixture(cfg.require("fixture"),
                                 cfg.get_double("fixture.param", 0.0));
        } catch (const ArgumentError& e) {
            throw ConfigError(e.what());
        }

        double T_max = cfg.get_double("T_max", 20.0);
        if (!(T_max > 0.0)) throw ConfigError("T_max must be positive");
        if (cfg.get_size("detect.nodes", 201) < 2)
            throw ConfigError("detect.nodes must be at least 2");
        if (!(cfg.get_double("detect.rho_span", 6.0) > 0.0))
            throw ConfigError("detect.rho_span must be positive");
        if (!(cfg.get_double("probe.budget", 1e6) > 0.0))
            throw ConfigError("probe.budget must be positive");
        if (cfg.get_double("perturb.delta", 0.05) < 0.0)
            throw ConfigError("perturb.delta must be nonnegative");
        if (!(cfg.get_double("picard.tol", 1e-10) > 0.0))
            throw ConfigError("picard.tol must be positive");
    } catch (const ConfigError& e) {
        result.exit_status = 2;
        result.stages.push_back({"preflight", false, e.what()});
        return result;
    }

    std::string out_dir = !output_root_override.empty() ? output_root_override
                                                        : cfg.get("output", "");
    if (out_dir.empty()) {
        const char* env = std::getenv("RHODICH_OUT");
        out_dir = env != nullptr ? env : ".";
    }
    std::filesystem::create_directories(out_dir);
    result.output_dir = out_dir;

    StageContext ctx;
    ctx.fx = std::move(fx);
    ctx.cfg = cfg;
    ctx.out_dir = out_dir;
    ctx.T_max = cfg.get_double("T_max", 20.0);
    ctx.seed = static_cast<unsigned>(cfg.get_size("seed", 20240601));
    ctx.files = &result.report_files;

    for (const std::string& stage : pipeline) {
        StageOutcome oc;
        try {
            if (stage == "validate") oc = stage_validate(ctx);
            else if (stage == "detect") oc = stage_detect(ctx);
            else if (stage == "adapt") oc = stage_adapt(ctx);
            else if (stage == "probe_y1") oc = stage_probe(ctx, AdmissibilityPair::Y1);
            else if (stage == "probe_yinf")
                oc = stage_probe(ctx, AdmissibilityPair::YinfPrime);
            else oc = stage_perturb(ctx);
        } catch (const Error& e) {
            oc = {stage, false, std::string("error: ") + e.what()};
        }
        if (!oc.pass) result.exit_status = 1;
        result.stages.push_back(std::move(oc));
    }

    std::string summary_path = out_dir + "/summary.txt";
    std::ofstream summary(summary_path);
    summary << "rhodich scenario summary\n";
    summary << "fixture " << ctx.fx.name << "\n";
    summary << "seed " << ctx.seed << "\n";
    summary << "T_max " << fmt(ctx.T_max) << "\n";
    summary << "config_keys";
    for (const auto& [k, v] : cfg.kv) summary << " " << k << "=" << v;
    summary << "\n";
    for (const auto& oc : result.stages)
        summary << (oc.pass ? "PASS " : "FAIL ") << oc.stage << ": " << oc.detail
                << "\n";
    summary << "exit_status " << result.exit_status << "\n";
    result.report_files.push_back(summary_path);
    return result;
}

}  // namespace rhodich
