#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>

#include "rhodich/fixtures.hpp"
#include "rhodich/robust.hpp"

using namespace rhodich;

namespace {

std::vector<double> linspace(double lo, double hi, size_t n) {
    std::vector<double> g(n);
    for (size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

PerturbationFamily scalar_decay_perturbation(double delta, double a) {
    PerturbationFamily B;
    B.delta = delta;
    B.a = a;
    B.B = [delta, a](double t) {
        return MatrixXd::Constant(1, 1, delta * std::exp(-a * t));
    };
    return B;
}

}  // namespace

TEST_CASE("perturbation bound check") {
    RateFunction id = RateFunction::identity();
    auto grid = linspace(0.0, 30.0, 301);

    PerturbationFamily ok = scalar_decay_perturbation(0.05, 1.0);
    auto rep = check_perturbation_bound(ok, id, grid);
    CHECK(rep.pass);
    CHECK(rep.worst_ratio == doctest::Approx(0.05).epsilon(1e-12));

    PerturbationFamily flat;
    flat.delta = 0.05;
    flat.a = 1.0;
    flat.B = [](double) { return MatrixXd::Constant(1, 1, 0.05); };
    CHECK(!check_perturbation_bound(flat, id, grid).pass);

    // e^{-rho(t)} rho'(t) = (1+t)^{-2} under rho = ln(1+t)
    RateFunction lg = RateFunction::log1p_rate();
    PerturbationFamily poly;
    poly.delta = 0.05;
    poly.a = 1.0;
    poly.B = [](double t) {
        return MatrixXd::Constant(1, 1, 0.05 / ((1.0 + t) * (1.0 + t)));
    };
    auto rep3 = check_perturbation_bound(poly, lg, grid);
    CHECK(rep3.pass);
    CHECK(rep3.worst_ratio == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("Volterra solve with zero perturbation returns the base propagator") {
    Fixture fx = builtin_fixture("scalar_exp", 1.0);
    PerturbationFamily zero;
    zero.delta = 0.0;
    zero.B = [](double) { return MatrixXd::Zero(1, 1); };
    PicardResult res = solve_perturbed(fx.family, zero, 2.0, 0.5);
    CHECK((res.value - fx.family.propagator(2.0, 0.5)).norm() <= 1e-12);
    CHECK(res.iterations == 1);
}

TEST_CASE("Volterra solve against the closed-form shifted exponential") {
    Fixture fx = builtin_fixture("scalar_exp", 1.0);
    PerturbationFamily B;
    B.delta = 0.1;
    B.a = 0.0;
    B.B = [](double) { return MatrixXd::Constant(1, 1, 0.1); };
    PicardOptions opt;
    opt.tol = 1e-8;
    PicardResult res = solve_perturbed(fx.family, B, 1.0, 0.0, opt);
    // closed form U(t,s) = e^{(-1+0.1)(t-s)}
    CHECK(std::abs(res.value(0, 0) - std::exp(-0.9)) <= 1e-6);
    CHECK(res.iterations <= 12);
    // successive distances contract geometrically, ratio about 0.1 * (t-s)
    for (size_t i = 1; i + 1 < res.step_distances.size(); ++i)
        CHECK(res.step_distances[i + 1] <= 0.15 * res.step_distances[i]);
}

TEST_CASE("perturbed family wrapper keeps the cocycle") {
    Fixture fx = builtin_fixture("scalar_exp", 1.0);
    PerturbationFamily zero;
    zero.delta = 0.0;
    zero.B = [](double) { return MatrixXd::Zero(1, 1); };
    EvolutionFamily wrapped = perturbed_family(fx.family, zero);
    for (double t : {0.5, 1.0, 3.0, 7.0})
        CHECK((wrapped.propagator(t, 0.25) - fx.family.propagator(t, 0.25))
                  .norm() <= 1e-12);

    PerturbationFamily B = scalar_decay_perturbation(0.1, 1.0);
    EvolutionFamily pert = perturbed_family(fx.family, B);
    std::vector<std::array<double, 3>> triples = {
        {3.0, 2.0, 1.0}, {5.0, 2.5, 0.0}, {4.0, 3.9, 0.1}};
    CHECK(cocycle_residual(pert, triples) <= 1e-6);

    Fixture dg = builtin_fixture("diag2d");
    PerturbationFamily off;
    off.delta = 0.05;
    off.a = 1.0;
    off.B = [](double t) {
        MatrixXd M = MatrixXd::Zero(2, 2);
        M(0, 1) = 0.05 * std::exp(-t);
        return M;
    };
    EvolutionFamily pert2 = perturbed_family(dg.family, off);
    CHECK(cocycle_residual(pert2, triples) <= 1e-5);
}

TEST_CASE("operator bounds: zero perturbation and the tight scalar case") {
    RateFunction id = RateFunction::identity();
    NormFamily base = NormFamily::base();
    SampledFunction one = SampledFunction::from_function(
        [](double) { return VectorXd(VectorXd::Ones(1)); }, 40.0, 40001);

    PerturbationFamily zero;
    zero.delta = 0.0;
    zero.a = 1.0;
    zero.B = [](double) { return MatrixXd::Zero(1, 1); };
    auto rep0 = perturbation_operator_bounds(zero, base, 1.0, 0.0, id, {one});
    CHECK(rep0.pass);
    CHECK(rep0.y1_values[0] == 0.0);
    CHECK(rep0.yinf_values[0] == 0.0);

    PerturbationFamily B = scalar_decay_perturbation(0.05, 1.0);
    auto rep = perturbation_operator_bounds(B, base, 1.0, 0.0, id, {one});
    CHECK(rep.pass);
    // ||Bx||_1 = 0.05 (1 - e^{-40}) = delta C / a up to the truncated tail
    CHECK(std::abs(rep.y1_values[0] - 0.05) <= 1e-6);
    // sup |B(t)| / rho' = 0.05 at t = 0 exactly
    CHECK(rep.yinf_values[0] == doctest::Approx(0.05).epsilon(1e-12));
    // the bound is attained exactly; quadrature may overshoot by ~h^2
    CHECK(rep.worst_y1_ratio <= 1.0 + 1e-6);
    CHECK(rep.worst_yinf_ratio <= 1.0 + 1e-6);
}

TEST_CASE("robustness experiment on the scalar contraction") {
    Fixture fx = builtin_fixture("scalar_exp", 1.0);
    PerturbationFamily B = scalar_decay_perturbation(0.05, 1.0);
    RobustnessConfig cfg;
    cfg.T_max = 20.0;
    cfg.horizon = 10.0;
    RobustnessReport rep =
        robustness_experiment(fx.family, B, fx.Z, fx.norms, fx.rate, cfg);
    CHECK(rep.after.lambda >= 0.8);
    CHECK(rep.after.D <= 1.5);
    CHECK(rep.mild_identity_residual <= 1e-6);

    // Picard contraction is measured and geometric
    PicardResult pr = solve_perturbed(fx.family, B, 20.0, 0.0);
    for (size_t i = 1; i + 1 < pr.step_distances.size(); ++i)
        CHECK(pr.step_distances[i + 1] < pr.step_distances[i]);
}

TEST_CASE("zero perturbation leaves the certificate unchanged") {
    Fixture fx = builtin_fixture("scalar_exp", 1.0);
    PerturbationFamily zero;
    zero.delta = 0.0;
    zero.a = 1.0;
    zero.B = [](double) { return MatrixXd::Zero(1, 1); };
    RobustnessConfig cfg;
    cfg.T_max = 20.0;
    cfg.horizon = 10.0;
    RobustnessReport rep =
        robustness_experiment(fx.family, zero, fx.Z, fx.norms, fx.rate, cfg);
    CHECK(std::abs(rep.lambda_drop) <= 1e-9);
    CHECK(std::abs(rep.D_growth - 1.0) <= 1e-9);
}

TEST_CASE("off-diagonal perturbation barely moves the stable space") {
    Fixture fx = builtin_fixture("diag2d");
    PerturbationFamily off;
    off.delta = 0.02;
    off.a = 1.0;
    off.B = [](double t) {
        MatrixXd M = MatrixXd::Zero(2, 2);
        M(0, 1) = 0.02 * std::exp(-t);
        return M;
    };
    RobustnessConfig cfg;
    cfg.T_max = 20.0;
    cfg.horizon = 10.0;
    RobustnessReport rep =
        robustness_experiment(fx.family, off, fx.Z, fx.norms, fx.rate, cfg);
    CHECK(rep.stable_angle <= 0.1);
    CHECK(rep.after.lambda > 0.8);
}

TEST_CASE("degradation is monotone in the perturbation size") {
    Fixture fx = builtin_fixture("scalar_exp", 1.0);
    RobustnessConfig cfg;
    cfg.T_max = 20.0;
    cfg.horizon = 10.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double delta : {0.01, 0.02, 0.05}) {
        PerturbationFamily B = scalar_decay_perturbation(delta, 1.0);
        RobustnessReport rep =
            robustness_experiment(fx.family, B, fx.Z, fx.norms, fx.rate, cfg);
        CHECK(rep.after.lambda <= prev + 1e-12);
        prev = rep.after.lambda;
    }
}

TEST_CASE("declared-bound violations are rejected up front") {
    Fixture fx = builtin_fixture("scalar_exp", 1.0);
    PerturbationFamily liar;
    liar.delta = 0.01;  // claims 0.01 but acts at 0.05
    liar.a = 1.0;
    liar.B = [](double t) {
        return MatrixXd::Constant(1, 1, 0.05 * std::exp(-t));
    };
    RobustnessConfig cfg;
    cfg.T_max = 20.0;
    cfg.horizon = 10.0;
    CHECK_THROWS_AS(
        robustness_experiment(fx.family, liar, fx.Z, fx.norms, fx.rate, cfg),
        ArgumentError);
}
