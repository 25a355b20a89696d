#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rhodich/family.hpp"

using namespace rhodich;

namespace {

EvolutionFamily diag_family() {
    return EvolutionFamily::closed_form(2, [](double t, double s) {
        MatrixXd M = MatrixXd::Zero(2, 2);
        M(0, 0) = std::exp(-(t - s));
        M(1, 1) = std::exp(t - s);
        return M;
    });
}

std::vector<std::array<double, 3>> random_triples(double lo, double hi,
                                                  size_t count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(lo, hi);
    std::vector<std::array<double, 3>> triples;
    for (size_t i = 0; i < count; ++i) {
        std::array<double, 3> tr = {uni(rng), uni(rng), uni(rng)};
        std::sort(tr.begin(), tr.end());
        std::swap(tr[0], tr[2]);
        triples.push_back(tr);
    }
    return triples;
}

}  // namespace

TEST_CASE("closed-form diagonal propagator") {
    EvolutionFamily fam = diag_family();
    MatrixXd T = fam.propagator(2.0, 1.0);
    CHECK(T(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(T(1, 1) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(T(0, 1) == 0.0);

    MatrixXd I = fam.propagator(3.0, 3.0);
    CHECK((I - MatrixXd::Identity(2, 2)).norm() <= 1e-10);
}

TEST_CASE("propagator rejects reversed time arguments") {
    EvolutionFamily fam = diag_family();
    CHECK_THROWS_AS(fam.propagator(1.0, 2.0), ArgumentError);
    CHECK_THROWS_AS(fam.propagator(1.0, -0.5), ArgumentError);
}

TEST_CASE("ODE source matches the scalar exponential") {
    EvolutionFamily fam = EvolutionFamily::ode(
        1, [](double) { return MatrixXd::Constant(1, 1, -2.0); });
    double v = fam.propagator(1.0, 0.0)(0, 0);
    CHECK(std::abs(v - std::exp(-2.0)) <= 1e-6);
}

TEST_CASE("cocycle residual on closed-form and ODE families") {
    CHECK(cocycle_residual(diag_family(), random_triples(0, 10, 20, 1)) <= 1e-12);

    EvolutionFamily rot = EvolutionFamily::ode(2, [](double) {
        MatrixXd A(2, 2);
        A << 0, 1, -1, 0;
        return A;
    });
    CHECK(cocycle_residual(rot, random_triples(0, 5, 20, 2)) <= 1e-5);

    EvolutionFamily id = EvolutionFamily::closed_form(
        1, [](double, double) { return MatrixXd::Identity(1, 1); });
    CHECK(cocycle_residual(id, random_triples(0, 10, 20, 3)) == 0.0);
}

TEST_CASE("unordered triples are rejected") {
    CHECK_THROWS_AS(cocycle_residual(diag_family(), {{1.0, 2.0, 0.0}}),
                    ArgumentError);
}

TEST_CASE("halving integrator tolerance does not worsen the cocycle") {
    auto A = [](double t) {
        MatrixXd M(2, 2);
        M << 0, 1, -1 - 0.1 * std::sin(t), 0;
        return M;
    };
    auto triples = random_triples(0, 5, 10, 4);
    double coarse = cocycle_residual(EvolutionFamily::ode(2, A, 1e-4), triples);
    double fine = cocycle_residual(EvolutionFamily::ode(2, A, 1e-8), triples);
    CHECK(fine <= coarse + 1e-12);
    CHECK(fine <= 1e-6);
}

TEST_CASE("propagator caching is semantically invisible") {
    EvolutionFamily fam = diag_family();
    MatrixXd first = fam.propagator(4.0, 1.5);
    MatrixXd cached = fam.propagator(4.0, 1.5);
    CHECK((first - cached).norm() == 0.0);  // bitwise for closed form
    EvolutionFamily fresh = diag_family();
    CHECK((fresh.propagator(4.0, 1.5) - cached).norm() == 0.0);
}

TEST_CASE("norm bounds estimate fits the claimed envelope") {
    RateFunction rate = RateFunction::log1p_rate();
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i);
    std::vector<VectorXd> probes = {VectorXd::Unit(2, 0), VectorXd::Unit(2, 1),
                                    VectorXd::Constant(2, 1.0 / std::sqrt(2.0))};

    NormFamily base = NormFamily::base();
    auto nb = norm_bounds_estimate(base, rate, grid, probes);
    CHECK(nb.C == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(nb.eps == doctest::Approx(0.0).epsilon(1e-12));

    NormFamily grow;
    grow.eval = [](double t, const VectorXd& x) { return (1.0 + t) * x.norm(); };
    auto nb2 = norm_bounds_estimate(grow, rate, grid, probes);
    // (1+t) = e^{rho(t)} under rho = ln(1+t)
    CHECK(nb2.C == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(nb2.eps == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("norm bounds estimate rejects norms below the base norm") {
    RateFunction rate = RateFunction::identity();
    NormFamily shrunk;
    shrunk.eval = [](double, const VectorXd& x) { return 0.5 * x.norm(); };
    std::vector<double> grid = {0.0, 1.0, 2.0};
    std::vector<VectorXd> probes = {VectorXd::Unit(2, 0)};
    CHECK_THROWS_AS(norm_bounds_estimate(shrunk, rate, grid, probes),
                    NormLowerBoundError);
}
