#include "rhodich/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace rhodich {

RateFunction RateFunction::identity(double domain_hint) {
    RateFunction r;
    r.kind_ = RateKind::identity;
    r.eval_ = [](double t) { return t; };
    r.deriv_ = [](double) { return 1.0; };
    r.domain_hint_ = domain_hint;
    return r;
}

RateFunction RateFunction::log1p_rate(double domain_hint) {
    RateFunction r;
    r.kind_ = RateKind::log1p;
    r.eval_ = [](double t) { return std::log1p(t); };
    r.deriv_ = [](double t) { return 1.0 / (1.0 + t); };
    r.domain_hint_ = domain_hint;
    return r;
}

namespace {

// Cumulative trapezoid table of a piecewise-linear density. Trapezoid is
// exact for linear pieces, so midpoint refinement only serves monotone
// lookup density, not accuracy.
struct MuTable {
    std::vector<double> t;
    std::vector<double> mu;
    std::vector<double> rho;  // cumulative integral at t[i]

    double eval_mu(double x) const {
        if (x <= t.front()) return mu.front();
        if (x >= t.back()) return mu.back();
        auto it = std::upper_bound(t.begin(), t.end(), x);
        size_t i = static_cast<size_t>(it - t.begin()) - 1;
        double w = (x - t[i]) / (t[i + 1] - t[i]);
        return mu[i] + w * (mu[i + 1] - mu[i]);
    }

    double eval_rho(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= t.back())
            return rho.back() + mu.back() * (x - t.back());
        auto it = std::upper_bound(t.begin(), t.end(), x);
        size_t i = static_cast<size_t>(it - t.begin()) - 1;
        double mu_x = eval_mu(x);
        // exact trapezoid of the linear interpolant on [t_i, x]
        return rho[i] + 0.5 * (mu[i] + mu_x) * (x - t[i]);
    }
};

}  // namespace

RateFunction RateFunction::mu_integral(const std::vector<double>& t_samples,
                                       const std::vector<double>& mu_samples) {
    if (t_samples.size() != mu_samples.size() || t_samples.size() < 2)
        throw ArgumentError("mu_integral: need matching sample vectors of length >= 2");
    if (t_samples.front() != 0.0)
        throw ArgumentError("mu_integral: sample grid must start at 0");
    for (size_t i = 0; i < t_samples.size(); ++i) {
        if (i > 0 && t_samples[i] <= t_samples[i - 1])
            throw ArgumentError("mu_integral: sample grid not strictly increasing");
        if (mu_samples[i] <= 0.0) {
            std::ostringstream os;
            os << "mu_integral: non-positive mu sample " << mu_samples[i]
               << " at t=" << t_samples[i] << " (index " << i << ")";
            throw ArgumentError(os.str());
        }
    }

    auto table = std::make_shared<MuTable>();
    // refine with midpoints once for denser lookup
    for (size_t i = 0; i + 1 < t_samples.size(); ++i) {
        double tm = 0.5 * (t_samples[i] + t_samples[i + 1]);
        table->t.push_back(t_samples[i]);
        table->mu.push_back(mu_samples[i]);
        table->t.push_back(tm);
        table->mu.push_back(0.5 * (mu_samples[i] + mu_samples[i + 1]));
    }
    table->t.push_back(t_samples.back());
    table->mu.push_back(mu_samples.back());

    table->rho.resize(table->t.size());
    table->rho[0] = 0.0;
    for (size_t i = 1; i < table->t.size(); ++i)
        table->rho[i] = table->rho[i - 1] +
                        0.5 * (table->mu[i - 1] + table->mu[i]) *
                            (table->t[i] - table->t[i - 1]);

    RateFunction r;
    r.kind_ = RateKind::mu_integral;
    r.eval_ = [table](double t) { return table->eval_rho(t); };
    r.deriv_ = [table](double t) { return table->eval_mu(t); };
    r.domain_hint_ = t_samples.back();
    return r;
}

RateFunction RateFunction::custom(std::function<double(double)> eval,
                                  std::function<double(double)> deriv,
                                  double domain_hint) {
    RateFunction r;
    r.kind_ = RateKind::custom;
    r.eval_ = std::move(eval);
    r.deriv_ = std::move(deriv);
    r.domain_hint_ = domain_hint;
    return r;
}

double RateFunction::inverse(double y) const {
    if (y < 0.0) throw ArgumentError("rate inverse: y must be nonnegative");
    if (y == 0.0) return 0.0;

    double hi = std::max(domain_hint_, 1.0);
    const double hi_cap = std::max(domain_hint_, 1.0) * 1024.0;  // 2^10
    while (eval_(hi) < y) {
        hi *= 2.0;
        if (hi > hi_cap) {
            std::ostringstream os;
            os << "rate inverse: bracket exceeded " << hi_cap
               << " before rho reached " << y << " (rate grows too slowly)";
            throw RateDivergenceError(os.str());
        }
    }
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double v = eval_(mid);
        if (std::abs(v - y) <= 1e-10 && (hi - lo) <= 1e-12 * (1.0 + mid))
            return mid;
        if (v < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

RateValidationReport validate_rate(const RateFunction& rate,
                                   const std::vector<double>& grid) {
    if (grid.size() < 2 || grid.front() != 0.0)
        throw ArgumentError("validate_rate: grid must start at 0 and have >= 2 nodes");
    for (size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw ArgumentError("validate_rate: grid not strictly increasing");

    RateValidationReport rep;
    rep.rho0_offset = std::abs(rate(0.0));
    rep.min_deriv = rate.deriv(grid[0]);
    bool deriv_ok = true;
    for (size_t i = 0; i < grid.size(); ++i) {
        double d = rate.deriv(grid[i]);
        rep.min_deriv = std::min(rep.min_deriv, d);
        if (d <= 0.0) deriv_ok = false;
        if (i > 0 && rate(grid[i]) <= rate(grid[i - 1]))
            rep.monotonicity_violations.push_back(grid[i - 1]);
    }
    bool inverse_ok = true;
    for (double t : grid) {
        double err;
        try {
            err = std::abs(rate.inverse(rate(t)) - t);
        } catch (const Error&) {
            err = std::numeric_limits<double>::infinity();
        }
        rep.inverse_errors.push_back(err);
        if (err > 1e-8 * (1.0 + t)) inverse_ok = false;
    }
    rep.pass = rep.rho0_offset <= 1e-12 && rep.monotonicity_violations.empty() &&
               deriv_ok && inverse_ok;
    return rep;
}

}  // namespace rhodich
