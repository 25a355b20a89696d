#include "rhodich/fixtures.hpp"

#include <cmath>
#include <sstream>

namespace rhodich {

namespace {

bool is_power_of_two(long n) {
    return n > 0 && (n & (n - 1)) == 0;
}

// A_n = n when n is a power of two, 0 otherwise; T(t,s) is the running
// product A_{floor(t)-1} ... A_{floor(s)} (1 on a common unit cell).
double example2_propagator(double t, double s) {
    long ft = static_cast<long>(std::floor(t));
    long fs = static_cast<long>(std::floor(s));
    if (ft == fs) return 1.0;
    double prod = 1.0;
    for (long n = fs; n <= ft - 1; ++n) {
        double an = is_power_of_two(n) ? static_cast<double>(n) : 0.0;
        prod *= an;
        if (prod == 0.0) return 0.0;
    }
    return prod;
}

EvolutionFamily scalar_family(const std::function<double(double, double)>& f,
                              bool discontinuous = false) {
    return EvolutionFamily::closed_form(
        1,
        [f](double t, double s) {
            MatrixXd M(1, 1);
            M(0, 0) = f(t, s);
            return M;
        },
        discontinuous);
}

}  // namespace

std::vector<std::string> fixture_names() {
    return {"example1", "example2",   "diag2d",
            "scalar_exp", "scalar_poly", "nonuniform_scalar"};
}

Fixture builtin_fixture(const std::string& name, double param) {
    Fixture fx;
    fx.name = name;
    fx.norms = NormFamily::base();

    if (name == "example1") {
        // T = Id, Z = {0}: the Y1 hypothesis holds, the Yinf' one fails,
        // and there is no dichotomy.
        fx.family = EvolutionFamily::closed_form(
            1, [](double, double) { return MatrixXd::Identity(1, 1); });
        fx.rate = RateFunction::identity();
        fx.Z = SubspaceZ::trivial(1);
        fx.expect_dichotomy = false;
        fx.expect_yinf_admissible = false;
    } else if (name == "example2") {
        fx.family = scalar_family(example2_propagator, /*discontinuous=*/true);
        fx.rate = RateFunction::log1p_rate(2048.0);
        fx.Z = SubspaceZ::trivial(1);
        fx.discontinuous = true;
        fx.expect_dichotomy = false;
        fx.expect_y1_admissible = false;
    } else if (name == "diag2d") {
        fx.family = EvolutionFamily::closed_form(2, [](double t, double s) {
            MatrixXd M = MatrixXd::Zero(2, 2);
            M(0, 0) = std::exp(-(t - s));
            M(1, 1) = std::exp(t - s);
            return M;
        });
        fx.rate = RateFunction::identity();
        fx.Z = SubspaceZ::span({VectorXd::Unit(2, 1)});
        fx.known_lambda = 1.0;
        MatrixXd P = MatrixXd::Zero(2, 2);
        P(0, 0) = 1.0;
        fx.known_P = P;
    } else if (name == "scalar_exp") {
        double lam = param > 0.0 ? param : 2.0;
        fx.family = scalar_family(
            [lam](double t, double s) { return std::exp(-lam * (t - s)); });
        fx.rate = RateFunction::identity();
        fx.Z = SubspaceZ::trivial(1);
        fx.known_lambda = lam;
        fx.known_P = MatrixXd::Identity(1, 1);
    } else if (name == "scalar_poly") {
        double p = param > 0.0 ? param : 3.0;
        fx.family = scalar_family([p](double t, double s) {
            return std::pow((1.0 + s) / (1.0 + t), p);
        });
        fx.rate = RateFunction::log1p_rate(1e6);
        fx.Z = SubspaceZ::trivial(1);
        fx.known_lambda = p;
        fx.known_P = MatrixXd::Identity(1, 1);
    } else if (name == "nonuniform_scalar") {
        // oscillating prefactor forces a nonuniform equivalence factor
        fx.family = scalar_family([](double t, double s) {
            return std::exp(-(t - s) +
                            (t * std::cos(t) - s * std::cos(s)) / 4.0);
        });
        fx.rate = RateFunction::identity();
        fx.Z = SubspaceZ::trivial(1);
        fx.known_P = MatrixXd::Identity(1, 1);
    } else {
        std::ostringstream os;
        os << "unknown fixture '" << name << "'; available:";
        for (const auto& n : fixture_names()) os << " " << n;
        throw ArgumentError(os.str());
    }
    return fx;
}

}  // namespace rhodich
