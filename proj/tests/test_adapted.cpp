#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rhodich/adapted.hpp"
#include "rhodich/fixtures.hpp"

using namespace rhodich;

namespace {

std::vector<double> linspace(double lo, double hi, size_t n) {
    std::vector<double> g(n);
    for (size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

DichotomyCertificate detect(const Fixture& fx, double T_max) {
    DetectOptions opt;
    opt.T_max = T_max;
    return detect_dichotomy(fx.family, fx.Z, fx.norms, fx.rate, opt);
}

}  // namespace

TEST_CASE("supremand of a contracting scalar family peaks at tau = t") {
    Fixture fx = builtin_fixture("scalar_exp");  // e^{-2(t-s)}
    DichotomyCertificate cert;
    cert.proj = ProjectionPath::constant(linspace(0.0, 20.0, 201),
                                         MatrixXd::Identity(1, 1));
    cert.D = 1.0;
    cert.lambda = 2.0;
    VectorXd x = 3.0 * VectorXd::Unit(1, 0);
    // e^{lambda(tau-t)} e^{-2(tau-t)} decreases for lambda = 1, so the
    // supremum sits at the left endpoint and the norm equals |x|
    double v = adapted_norm_eval(fx.family, cert, fx.rate, 2.0, x, 1.0, 8.0);
    CHECK(v == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("identity family makes the forward supremand grow") {
    Fixture fx = builtin_fixture("example1");
    DichotomyCertificate cert;
    cert.proj = ProjectionPath::constant(linspace(0.0, 20.0, 201),
                                         MatrixXd::Identity(1, 1));
    cert.D = 1.0;
    cert.lambda = 2.0;
    VectorXd x = VectorXd::Unit(1, 0);
    CHECK_THROWS_AS(
        adapted_norm_eval(fx.family, cert, fx.rate, 2.0, x, 1.0, 8.0),
        HorizonTooShortError);
}

TEST_CASE("two-sided supremum on a stiff saddle") {
    EvolutionFamily fam = EvolutionFamily::closed_form(2, [](double t, double s) {
        MatrixXd M = MatrixXd::Zero(2, 2);
        M(0, 0) = std::exp(-2.0 * (t - s));
        M(1, 1) = std::exp(2.0 * (t - s));
        return M;
    });
    MatrixXd P = MatrixXd::Zero(2, 2);
    P(0, 0) = 1.0;
    DichotomyCertificate cert;
    cert.proj = ProjectionPath::constant(linspace(0.0, 20.0, 201), P);
    cert.D = 1.0;
    cert.lambda = 2.0;
    VectorXd x = VectorXd::Ones(2);
    // each supremand is e^{-(tau-t)} resp. e^{-(t-tau)}, both peaking at 1
    double v = adapted_norm_eval(fam, cert, RateFunction::identity(), 1.0, x, 1.0,
                                 8.0);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("adapted norms uniformize the saddle at D = 1") {
    Fixture fx = builtin_fixture("diag2d");
    auto cert = std::make_shared<DichotomyCertificate>(detect(fx, 20.0));
    AdaptedNormFamily adapted(fx.family, cert, fx.rate);
    auto pairs = sample_time_pairs(20.0, 24, 41);
    auto probes = sample_probes(2, 4, 42);
    UniformityReport rep = adapted_uniformity_check(fx.family, *cert, fx.rate,
                                                    adapted, pairs, probes);
    CHECK(rep.pass);
    CHECK(rep.worst_forward_ratio <= 1.05);
    CHECK(rep.worst_backward_ratio <= 1.05);
}

TEST_CASE("uniformization fails when the supremum window collapses") {
    Fixture fx = builtin_fixture("nonuniform_scalar");
    auto cert = std::make_shared<DichotomyCertificate>(detect(fx, 20.0));
    AdaptedNormOptions tiny;
    tiny.H_sup = 1e-3;  // degenerates the adapted norm to (almost) the base norm
    AdaptedNormFamily degenerate(fx.family, cert, fx.rate, tiny);
    auto pairs = sample_time_pairs(20.0, 24, 43);
    auto probes = sample_probes(1, 3, 44);
    UniformityReport rep = adapted_uniformity_check(fx.family, *cert, fx.rate,
                                                    degenerate, pairs, probes);
    CHECK(rep.worst_forward_ratio > 1.0);
    CHECK(!rep.pass);
}

TEST_CASE("equivalence constants of the adapted family") {
    // uniform scalar contraction: adapted norm equals the base norm
    Fixture sc = builtin_fixture("scalar_exp");
    auto cert_sc = std::make_shared<DichotomyCertificate>(detect(sc, 20.0));
    AdaptedNormFamily adapted_sc(sc.family, cert_sc, sc.rate);
    auto grid = linspace(0.0, 15.0, 31);
    auto probes1 = sample_probes(1, 3, 45);
    EquivalenceReport er1 = adapted_equivalence_check(sc.family, *cert_sc, sc.rate,
                                                      adapted_sc, grid, probes1);
    CHECK(er1.pass);
    CHECK(er1.C_hat == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(er1.eps_hat == doctest::Approx(0.0).epsilon(1e-9));

    Fixture dg = builtin_fixture("diag2d");
    auto cert_dg = std::make_shared<DichotomyCertificate>(detect(dg, 20.0));
    AdaptedNormFamily adapted_dg(dg.family, cert_dg, dg.rate);
    auto probes2 = sample_probes(2, 4, 46);
    EquivalenceReport er2 = adapted_equivalence_check(dg.family, *cert_dg, dg.rate,
                                                      adapted_dg, grid, probes2);
    CHECK(er2.pass);
    CHECK(er2.C_hat <= 2.0 * cert_dg->D + 0.05);

    Fixture nu = builtin_fixture("nonuniform_scalar");
    auto cert_nu = std::make_shared<DichotomyCertificate>(detect(nu, 20.0));
    AdaptedNormFamily adapted_nu(nu.family, cert_nu, nu.rate);
    EquivalenceReport er3 = adapted_equivalence_check(nu.family, *cert_nu, nu.rate,
                                                      adapted_nu, grid, probes1);
    CHECK(er3.eps_hat > 0.0);
}

TEST_CASE("truncation horizon growth is monotone") {
    Fixture fx = builtin_fixture("diag2d");
    DichotomyCertificate cert = detect(fx, 20.0);
    VectorXd x = VectorXd::Ones(2).normalized();
    double prev = 0.0;
    for (double H : {2.0, 4.0, 8.0}) {
        double v = adapted_norm_eval(fx.family, cert, fx.rate, 3.0, x,
                                     cert.lambda / 2.0, H);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("equivalence sandwich holds pointwise on probes") {
    Fixture fx = builtin_fixture("diag2d");
    auto cert = std::make_shared<DichotomyCertificate>(detect(fx, 20.0));
    AdaptedNormFamily adapted(fx.family, cert, fx.rate);
    auto grid = linspace(0.0, 15.0, 16);
    auto probes = sample_probes(2, 4, 47);
    EquivalenceReport er = adapted_equivalence_check(fx.family, *cert, fx.rate,
                                                     adapted, grid, probes);
    for (double t : grid)
        for (const VectorXd& x : probes) {
            double a = adapted.eval(t, x);
            CHECK(x.norm() <= a * (1.0 + 1e-9));
            CHECK(a <= er.C_hat * std::exp(er.eps_hat * fx.rate(t)) * x.norm() *
                           (1.0 + 1e-9));
        }
}
