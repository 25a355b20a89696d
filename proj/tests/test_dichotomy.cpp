#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rhodich/dichotomy.hpp"
#include "rhodich/fixtures.hpp"

using namespace rhodich;

namespace {

std::vector<double> linspace(double lo, double hi, size_t n) {
    std::vector<double> g(n);
    for (size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

double principal_angle(const MatrixXd& A, const MatrixXd& B) {
    Eigen::JacobiSVD<MatrixXd> svd(A.transpose() * B);
    double c = std::min(1.0, svd.singularValues().minCoeff());
    return std::acos(c);
}

}  // namespace

TEST_CASE("stable subspace of the diagonal saddle") {
    Fixture fx = builtin_fixture("diag2d");
    MatrixXd S = stable_subspace(fx.family, fx.norms, fx.rate, 0.0, 10.0, 0.2);
    REQUIRE(S.cols() == 1);
    CHECK(principal_angle(S, MatrixXd(VectorXd::Unit(2, 0))) <= 1e-3);
}

TEST_CASE("fully contracting family is stable in every direction") {
    EvolutionFamily fam = EvolutionFamily::closed_form(2, [](double t, double s) {
        MatrixXd M = MatrixXd::Zero(2, 2);
        M(0, 0) = std::exp(-(t - s));
        M(1, 1) = std::exp(-2.0 * (t - s));
        return M;
    });
    MatrixXd S = stable_subspace(fam, NormFamily::base(),
                                 RateFunction::identity(), 0.0, 10.0, 0.2);
    CHECK(S.cols() == 2);
}

TEST_CASE("identity family has an exponent in the dead zone") {
    Fixture fx = builtin_fixture("example1");
    CHECK_THROWS_AS(
        stable_subspace(fx.family, fx.norms, fx.rate, 0.0, 10.0, 0.2),
        GapViolationError);
}

TEST_CASE("unstable subspace is the propagated Z") {
    Fixture fx = builtin_fixture("diag2d");
    MatrixXd U = unstable_subspace(fx.family, fx.Z, 1.0);
    REQUIRE(U.cols() == 1);
    CHECK(principal_angle(U, MatrixXd(VectorXd::Unit(2, 1))) <= 1e-12);

    CHECK(unstable_subspace(fx.family, SubspaceZ::trivial(2), 1.0).cols() == 0);

    Fixture ex2 = builtin_fixture("example2");
    CHECK(unstable_subspace(ex2.family, ex2.Z, 5.0).cols() == 0);
}

TEST_CASE("oblique projections from the two bases") {
    std::vector<double> grid = {0.0};
    MatrixXd e1 = VectorXd::Unit(2, 0), e2 = VectorXd::Unit(2, 1);

    ProjectionPath straight = build_projections(grid, {e1}, {e2});
    MatrixXd expected = MatrixXd::Zero(2, 2);
    expected(0, 0) = 1.0;
    CHECK((straight.P[0] - expected).norm() <= 1e-12);

    VectorXd diagv(2);
    diagv << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    ProjectionPath oblique = build_projections(grid, {MatrixXd(diagv)}, {e2});
    MatrixXd expected2(2, 2);
    expected2 << 1, 0, 1, 0;
    CHECK((oblique.P[0] - expected2).norm() <= 1e-10);
    CHECK((oblique.P[0] * oblique.P[0] - oblique.P[0]).norm() <= 1e-10);

    CHECK_THROWS_AS(build_projections(grid, {e1}, {e1}),
                    DegenerateSplittingError);
}

TEST_CASE("backward factor on the diagonal saddle") {
    Fixture fx = builtin_fixture("diag2d");
    ProjectionPath proj =
        ProjectionPath::constant(linspace(0.0, 10.0, 101), *fx.known_P);
    // T(2,1) e2 = e * e2, so the backward factor at (1,2) scales e2 by 1/e
    MatrixXd B = backward_factor(fx.family, proj, 1.0, 2.0);
    VectorXd e2 = VectorXd::Unit(2, 1);
    CHECK((B * e2 - std::exp(-1.0) * e2).norm() <= 1e-12);
    // the stable component is annihilated by Q
    VectorXd e1 = VectorXd::Unit(2, 0);
    CHECK((B * e1).norm() <= 1e-12);
}

TEST_CASE("certificate fit recovers scalar decay constants") {
    Fixture fx = builtin_fixture("scalar_exp");  // lambda = 2
    ProjectionPath proj =
        ProjectionPath::constant(linspace(0.0, 20.0, 201), MatrixXd::Identity(1, 1));
    auto pairs = sample_time_pairs(20.0, 60, 11);
    auto probes = sample_probes(1, 4, 12);
    DichotomyCertificate cert =
        estimate_certificate(fx.family, proj, fx.norms, fx.rate, pairs, probes);
    CHECK(cert.lambda >= 1.9);
    CHECK(cert.lambda <= 2.1);
    CHECK(cert.D >= 0.95);
    CHECK(cert.D <= 1.05);
}

TEST_CASE("certificate fit recovers the polynomial rho-exponent") {
    Fixture fx = builtin_fixture("scalar_poly");  // exponent 3 under log1p
    ProjectionPath proj =
        ProjectionPath::constant(linspace(0.0, 50.0, 201), MatrixXd::Identity(1, 1));
    auto pairs = sample_time_pairs(50.0, 60, 13);
    auto probes = sample_probes(1, 4, 14);
    DichotomyCertificate cert =
        estimate_certificate(fx.family, proj, fx.norms, fx.rate, pairs, probes);
    CHECK(cert.lambda >= 2.85);
    CHECK(cert.lambda <= 3.15);
}

TEST_CASE("identity family yields no certificate") {
    Fixture fx = builtin_fixture("example1");
    ProjectionPath proj =
        ProjectionPath::constant(linspace(0.0, 20.0, 101), MatrixXd::Identity(1, 1));
    auto pairs = sample_time_pairs(20.0, 40, 15);
    auto probes = sample_probes(1, 3, 16);
    CHECK_THROWS_AS(
        estimate_certificate(fx.family, proj, fx.norms, fx.rate, pairs, probes),
        NoDichotomyError);
}

TEST_CASE("verification passes on a fitted certificate and fails on a forged one") {
    Fixture fx = builtin_fixture("diag2d");
    DetectOptions opt;
    opt.T_max = 20.0;
    DichotomyCertificate cert =
        detect_dichotomy(fx.family, fx.Z, fx.norms, fx.rate, opt);
    auto pairs = sample_time_pairs(20.0, 80, 21);
    auto probes = sample_probes(2, 6, 22);
    VerifyReport rep =
        verify_dichotomy(fx.family, cert, fx.norms, fx.rate, pairs, probes);
    CHECK(rep.pass);
    CHECK(rep.diagnostics.d1_slack <= 1e-6);
    CHECK(rep.diagnostics.d2_slack <= 1e-6);

    DichotomyCertificate forged = cert;
    forged.lambda *= 2.0;
    VerifyReport bad =
        verify_dichotomy(fx.family, forged, fx.norms, fx.rate, pairs, probes);
    CHECK(!bad.pass);
    CHECK(bad.diagnostics.d1_slack > 1e-6);
}

TEST_CASE("blowup family defeats every moderate certificate") {
    // propagator jumps by a factor 1024 across [1024, 1025]
    Fixture fx = builtin_fixture("example2");
    std::vector<double> grid;
    for (int i = 0; i <= 1030; ++i) grid.push_back(i);
    std::vector<std::pair<double, double>> pairs = {{1024.0, 1025.0}, {2.0, 3.0}};
    auto probes = sample_probes(1, 2, 23);
    for (double D : {1.0, 10.0, 100.0, 1000.0}) {
        for (double lam : {0.25, 0.5, 1.0, 2.0}) {
            DichotomyCertificate cert;
            cert.proj = ProjectionPath::constant(grid, MatrixXd::Identity(1, 1));
            cert.D = D;
            cert.lambda = lam;
            VerifyReport rep = verify_dichotomy(fx.family, cert, fx.norms,
                                                fx.rate, pairs, probes);
            CHECK(!rep.pass);
            CHECK(rep.d1_worst_s == doctest::Approx(1024.0));
            CHECK(rep.d1_worst_t == doctest::Approx(1025.0));
        }
    }
}

TEST_CASE("certificates depend on rho-time only") {
    Fixture a = builtin_fixture("scalar_exp", 3.0);   // e^{-3(t-s)}, rho = t
    Fixture b = builtin_fixture("scalar_poly", 3.0);  // ((1+s)/(1+t))^3, rho = ln(1+t)
    DetectOptions opt;
    opt.T_max = 30.0;
    DichotomyCertificate ca = detect_dichotomy(a.family, a.Z, a.norms, a.rate, opt);
    DichotomyCertificate cb = detect_dichotomy(b.family, b.Z, b.norms, b.rate, opt);
    CHECK(std::abs(ca.lambda - cb.lambda) <= 0.05 * std::max(ca.lambda, cb.lambda));
}

TEST_CASE("detection recovers the known projection of the saddle") {
    Fixture fx = builtin_fixture("diag2d");
    DetectOptions opt;
    opt.T_max = 20.0;
    DichotomyCertificate cert =
        detect_dichotomy(fx.family, fx.Z, fx.norms, fx.rate, opt);
    CHECK(std::abs(cert.lambda - 1.0) <= 0.05);
    for (const MatrixXd& P : cert.proj.P)
        CHECK((P - *fx.known_P).norm() <= 1e-6);

    // stable-space membership: stable directions stay bounded by D
    VectorXd v = VectorXd::Unit(2, 0);
    for (double t : linspace(0.0, 20.0, 41))
        CHECK(fx.norms(t, fx.family.propagator(t, 0.0) * v) <=
              cert.D * fx.norms(0.0, v) * (1.0 + 1e-9));
}

TEST_CASE("deterministic sampling helpers") {
    auto p1 = sample_time_pairs(10.0, 20, 5);
    auto p2 = sample_time_pairs(10.0, 20, 5);
    CHECK(p1 == p2);
    auto v1 = sample_probes(3, 5, 6);
    auto v2 = sample_probes(3, 5, 6);
    REQUIRE(v1.size() == v2.size());
    for (size_t i = 0; i < v1.size(); ++i) CHECK((v1[i] - v2[i]).norm() == 0.0);
    for (const auto& [s, t] : p1) CHECK(t >= s);
}

TEST_CASE("certificate text round trip") {
    Fixture fx = builtin_fixture("diag2d");
    DetectOptions opt;
    opt.T_max = 10.0;
    opt.nodes = 21;
    DichotomyCertificate cert =
        detect_dichotomy(fx.family, fx.Z, fx.norms, fx.rate, opt);
    DichotomyCertificate back = certificate_from_text(certificate_to_text(cert));
    CHECK(back.lambda == cert.lambda);
    CHECK(back.D == cert.D);
    CHECK(back.M == cert.M);
    REQUIRE(back.proj.grid.size() == cert.proj.grid.size());
    for (size_t i = 0; i < cert.proj.grid.size(); ++i) {
        CHECK(back.proj.grid[i] == cert.proj.grid[i]);
        CHECK((back.proj.P[i] - cert.proj.P[i]).norm() == 0.0);
    }
}
