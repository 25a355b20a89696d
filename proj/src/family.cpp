#include "rhodich/family.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rhodich {

namespace {

// Dormand-Prince 4(5) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// embedded 4th-order weights
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

// Integrates M' = A(t) M from s to t starting at the identity.
MatrixXd integrate_matrix_ode(const std::function<MatrixXd(double)>& A, int d,
                              double s, double t, double tol) {
    MatrixXd M = MatrixXd::Identity(d, d);
    if (t == s) return M;
    double x = s;
    double h = std::min(0.1, (t - s));
    MatrixXd k1 = A(x) * M;
    const double hmin = 1e-14 * std::max(1.0, std::abs(t));
    while (x < t) {
        if (x + h > t) h = t - x;
        MatrixXd k2 = A(x + c2 * h) * (M + h * (a21 * k1));
        MatrixXd k3 = A(x + c3 * h) * (M + h * (a31 * k1 + a32 * k2));
        MatrixXd k4 = A(x + c4 * h) * (M + h * (a41 * k1 + a42 * k2 + a43 * k3));
        MatrixXd k5 =
            A(x + c5 * h) * (M + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        MatrixXd k6 = A(x + h) *
                      (M + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        MatrixXd M5 = M + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        MatrixXd k7 = A(x + h) * M5;
        MatrixXd M4 =
            M + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double scale = std::max(1.0, M.norm());
        double err = (M5 - M4).norm() / (tol * scale);
        if (err <= 1.0) {
            x += h;
            M = M5;
            k1 = k7;  // FSAL
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        h *= std::min(5.0, std::max(0.2, fac));
        if (h < hmin && x < t) {
            std::ostringstream os;
            os << "integrator step-size underflow on [" << x << ", " << t << "]";
            throw StiffnessError(os.str(), x, t);
        }
    }
    return M;
}

}  // namespace

EvolutionFamily EvolutionFamily::closed_form(
    int dim, std::function<MatrixXd(double, double)> map, bool discontinuous) {
    EvolutionFamily f;
    f.dim_ = dim;
    f.map_ = std::move(map);
    f.discontinuous_ = discontinuous;
    return f;
}

EvolutionFamily EvolutionFamily::ode(int dim, std::function<MatrixXd(double)> A,
                                     double tol) {
    EvolutionFamily f;
    f.dim_ = dim;
    f.A_ = std::move(A);
    f.tol_ = tol;
    return f;
}

MatrixXd EvolutionFamily::propagator(double t, double s) const {
    if (!map_ && !A_)
        throw ArgumentError("propagator: family not initialized");
    if (t < s || s < 0.0)
        throw ArgumentError("propagator: requires t >= s >= 0");
    {
        std::lock_guard<std::mutex> lk(cache_->mu);
        auto it = cache_->entries.find({t, s});
        if (it != cache_->entries.end()) return it->second;
    }
    MatrixXd M = map_ ? map_(t, s) : integrate_matrix_ode(A_, dim_, s, t, tol_);
    {
        std::lock_guard<std::mutex> lk(cache_->mu);
        cache_->entries.insert_or_assign({t, s}, M);
    }
    return M;
}

double cocycle_residual(const EvolutionFamily& family,
                        const std::vector<std::array<double, 3>>& triples) {
    double worst = 0.0;
    for (const auto& tr : triples) {
        double t = tr[0], s = tr[1], tau = tr[2];
        if (!(t >= s && s >= tau && tau >= 0.0))
            throw ArgumentError("cocycle_residual: triple not ordered t >= s >= tau >= 0");
        MatrixXd direct = family.propagator(t, tau);
        MatrixXd chained = family.propagator(t, s) * family.propagator(s, tau);
        double r = (chained - direct).norm() / (1.0 + direct.norm());
        worst = std::max(worst, r);
    }
    return worst;
}

NormFamily NormFamily::base() {
    NormFamily n;
    n.eval = [](double, const VectorXd& x) { return x.norm(); };
    n.claimed = std::make_pair(1.0, 0.0);
    return n;
}

NormBoundsEstimate norm_bounds_estimate(const NormFamily& norms,
                                        const RateFunction& rate,
                                        const std::vector<double>& grid,
                                        const std::vector<VectorXd>& probes) {
    if (grid.empty() || probes.empty())
        throw ArgumentError("norm_bounds_estimate: empty grid or probe set");

    NormBoundsEstimate est;
    // g(t) = max over probes of log(||x||_t / ||x||); upper support line in
    // rho-coordinates gives (log C, eps).
    std::vector<double> rhos, g;
    rhos.reserve(grid.size());
    g.reserve(grid.size());
    for (double t : grid) {
        double gmax = -std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < probes.size(); ++j) {
            const VectorXd& x = probes[j];
            double base = x.norm();
            if (base == 0.0) continue;
            double v = norms(t, x);
            double lower_gap = base - v;
            est.worst_lower_violation = std::max(est.worst_lower_violation, lower_gap);
            if (lower_gap > 1e-9 * base) {
                std::ostringstream os;
                os << "norm family violates lower bound ||x|| <= ||x||_t at t=" << t
                   << " (probe " << j << "): " << v << " < " << base;
                throw NormLowerBoundError(os.str(), t, static_cast<int>(j));
            }
            gmax = std::max(gmax, std::log(v / base));
        }
        rhos.push_back(rate(t));
        g.push_back(gmax);
    }

    double eps = 0.0;
    for (size_t i = 0; i < rhos.size(); ++i)
        for (size_t j = i + 1; j < rhos.size(); ++j)
            if (rhos[j] > rhos[i] + 1e-14)
                eps = std::max(eps, (g[j] - g[i]) / (rhos[j] - rhos[i]));
    double logC = 0.0;  // C >= 1 always holds since ||x||_t >= ||x||
    for (size_t i = 0; i < rhos.size(); ++i)
        logC = std::max(logC, g[i] - eps * rhos[i]);

    est.C = std::exp(logC);
    est.eps = eps;
    double min_slack = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < rhos.size(); ++i)
        min_slack = std::min(min_slack, logC + eps * rhos[i] - g[i]);
    est.max_slack_active = min_slack;  // 0 when the envelope touches
    return est;
}

}  // namespace rhodich
