// Command-line front end: scenario runner plus one-shot detection, probing
// and perturbation commands on the bundled fixtures.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rhodich/dichotomy.hpp"
#include "rhodich/fixtures.hpp"
#include "rhodich/green.hpp"
#include "rhodich/robust.hpp"
#include "rhodich/scenario.hpp"

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized-dichotomy analysis of evolution families"};
    app.require_subcommand(1);

    // run
    std::string config_path, out_override;
    auto* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("config", config_path, "scenario config file")->required();
    run->add_option("--out", out_override,
                    "output directory (overrides config and RHODICH_OUT)");

    // fixtures
    auto* fixtures = app.add_subcommand("fixtures", "list bundled fixtures");

    // shared fixture options
    std::string fixture_name = "diag2d";
    double fixture_param = 0.0, T_max = 20.0;
    unsigned seed = 20240601;

    // detect
    auto* detect = app.add_subcommand("detect", "detect a dichotomy and print "
                                                "the certificate");
    size_t det_nodes = 201;
    double det_span = 6.0;
    std::string cert_out;
    detect->add_option("--fixture", fixture_name, "fixture name");
    detect->add_option("--param", fixture_param, "fixture parameter");
    detect->add_option("--tmax", T_max, "time horizon");
    detect->add_option("--nodes", det_nodes, "projection grid nodes");
    detect->add_option("--rho-span", det_span, "classification horizon (rho units)");
    detect->add_option("--seed", seed, "sampling seed");
    detect->add_option("--cert-out", cert_out, "write the certificate here");

    // probe
    auto* probe = app.add_subcommand("probe", "admissibility shooting probe");
    std::string pair_name = "y1";
    double budget = 1e6;
    probe->add_option("--fixture", fixture_name, "fixture name");
    probe->add_option("--param", fixture_param, "fixture parameter");
    probe->add_option("--tmax", T_max, "time horizon");
    probe->add_option("--pair", pair_name, "y1 or yinf")
        ->check(CLI::IsMember({"y1", "yinf"}));
    probe->add_option("--budget", budget, "sup-norm budget");

    // perturb
    auto* perturb = app.add_subcommand("perturb", "robustness experiment");
    double delta = 0.05, decay_a = 1.0, horizon = 6.0;
    perturb->add_option("--fixture", fixture_name, "fixture name");
    perturb->add_option("--param", fixture_param, "fixture parameter");
    perturb->add_option("--tmax", T_max, "time horizon");
    perturb->add_option("--delta", delta, "perturbation size");
    perturb->add_option("--a", decay_a, "perturbation decay exponent");
    perturb->add_option("--horizon", horizon, "classification horizon");
    perturb->add_option("--seed", seed, "sampling seed");

    // report
    auto* report = app.add_subcommand("report", "summarize a certificate file");
    std::string cert_path;
    report->add_option("certificate", cert_path, "certificate file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            rhodich::ScenarioResult res =
                rhodich::run_scenario(config_path, out_override);
            for (const auto& oc : res.stages)
                std::cout << (oc.pass ? "PASS " : "FAIL ") << oc.stage << ": "
                          << oc.detail << "\n";
            if (res.exit_status == 0)
                std::cout << "reports in " << res.output_dir << "\n";
            return res.exit_status;
        }
        if (fixtures->parsed()) {
            for (const auto& n : rhodich::fixture_names()) std::cout << n << "\n";
            return 0;
        }

        rhodich::Fixture fx = rhodich::builtin_fixture(fixture_name, fixture_param);

        if (detect->parsed()) {
            rhodich::DetectOptions opt;
            opt.T_max = T_max;
            opt.nodes = det_nodes;
            opt.rho_span = det_span;
            opt.seed = seed;
            rhodich::DichotomyCertificate cert = rhodich::detect_dichotomy(
                fx.family, fx.Z, fx.norms, fx.rate, opt);
            std::cout << "lambda " << fmt(cert.lambda) << "\nD " << fmt(cert.D)
                      << "\nM " << fmt(cert.M) << "\n";
            if (!cert_out.empty()) {
                std::ofstream out(cert_out);
                out << rhodich::certificate_to_text(cert);
                std::cout << "certificate written to " << cert_out << "\n";
            }
            return 0;
        }
        if (probe->parsed()) {
            auto pair = pair_name == "y1" ? rhodich::AdmissibilityPair::Y1
                                          : rhodich::AdmissibilityPair::YinfPrime;
            auto suite = pair == rhodich::AdmissibilityPair::Y1
                             ? rhodich::bundled_suite_y1(fx.family.dim(), T_max)
                             : rhodich::bundled_suite_yinf(fx.family.dim(), T_max);
            rhodich::ProbeOptions opt;
            opt.budget = budget;
            rhodich::AdmissibilityReport rep = rhodich::admissibility_probe(
                fx.family, fx.Z, fx.norms, fx.rate, suite, pair, opt);
            std::cout << (rep.solvable ? "solvable" : "unsolvable")
                      << "\nbound_estimate " << fmt(rep.bound_estimate)
                      << "\nuniqueness_margin " << fmt(rep.uniqueness_margin)
                      << "\n";
            for (size_t i = 0; i < rep.candidate_sups.size(); ++i)
                std::cout << "candidate_sup[" << i << "] "
                          << fmt(rep.candidate_sups[i]) << "\n";
            return rep.solvable ? 0 : 1;
        }
        if (perturb->parsed()) {
            rhodich::PerturbationFamily B;
            B.delta = delta;
            B.a = decay_a;
            rhodich::RateFunction rate = fx.rate;
            const int d = fx.family.dim();
            B.B = [d, rate, delta, decay_a](double t) -> rhodich::MatrixXd {
                return delta * std::exp(-decay_a * rate(t)) * rate.deriv(t) *
                       rhodich::MatrixXd::Identity(d, d);
            };
            rhodich::RobustnessConfig rc;
            rc.T_max = T_max;
            rc.horizon = horizon;
            rc.seed = seed;
            rhodich::RobustnessReport rep = rhodich::robustness_experiment(
                fx.family, B, fx.Z, fx.norms, fx.rate, rc);
            std::cout << "lambda_before " << fmt(rep.before.lambda)
                      << "\nlambda_after " << fmt(rep.after.lambda)
                      << "\nD_before " << fmt(rep.before.D) << "\nD_after "
                      << fmt(rep.after.D) << "\nstable_angle "
                      << fmt(rep.stable_angle) << "\nmild_identity_residual "
                      << fmt(rep.mild_identity_residual) << "\n";
            return 0;
        }
        if (report->parsed()) {
            std::ifstream in(cert_path);
            if (!in) {
                std::cerr << "cannot open " << cert_path << "\n";
                return 2;
            }
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            rhodich::DichotomyCertificate cert =
                rhodich::certificate_from_text(text);
            std::cout << "nodes " << cert.proj.grid.size() << "\nlambda "
                      << fmt(cert.lambda) << "\nD " << fmt(cert.D) << "\nM "
                      << fmt(cert.M) << "\nd1_slack "
                      << fmt(cert.diagnostics.d1_slack) << "\nd2_slack "
                      << fmt(cert.diagnostics.d2_slack) << "\n";
            return 0;
        }
    } catch (const rhodich::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const rhodich::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
