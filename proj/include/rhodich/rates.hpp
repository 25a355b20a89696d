#ifndef RHODICH_RATES_HPP
#define RHODICH_RATES_HPP

#include <functional>
#include <string>
#include <vector>

#include "rhodich/errors.hpp"

namespace rhodich {

enum class RateKind { identity, log1p, mu_integral, custom };

// Strictly increasing C^1 time warp rho: [0,inf) -> [0,inf) with rho(0)=0.
// Immutable after construction; evaluation is reentrant.
class RateFunction {
  public:
    // Placeholder until a factory-made rate is assigned.
    RateFunction() = default;

    RateKind kind() const { return kind_; }
    double operator()(double t) const { return eval_(t); }
    double deriv(double t) const { return deriv_(t); }
    double domain_hint() const { return domain_hint_; }

    // Numeric inverse: bracket expansion from domain_hint, then bisection to
    // |rho(t) - y| <= 1e-10. Throws RateDivergenceError if the bracket
    // exceeds domain_hint * 2^10 without rho reaching y.
    double inverse(double y) const;

    static RateFunction identity(double domain_hint = 1e3);
    static RateFunction log1p_rate(double domain_hint = 1e3);
    // Running quadrature of a positive sampled density mu (linear interpolation
    // between samples; cumulative table refined with midpoints so the stored
    // piecewise-linear rho is exact for the interpolant).
    static RateFunction mu_integral(const std::vector<double>& t_samples,
                                    const std::vector<double>& mu_samples);
    static RateFunction custom(std::function<double(double)> eval,
                               std::function<double(double)> deriv,
                               double domain_hint);

  private:
    RateKind kind_ = RateKind::custom;
    std::function<double(double)> eval_;
    std::function<double(double)> deriv_;
    double domain_hint_ = 1e3;
};

struct RateValidationReport {
    bool pass = false;
    double rho0_offset = 0.0;        // |rho(0)|
    double min_deriv = 0.0;          // min rho' over grid
    std::vector<double> monotonicity_violations;  // left endpoints of bad cells
    std::vector<double> inverse_errors;           // |rho^-1(rho(t)) - t| per node
};

// Diagnostic sweep of the RateFunction invariants over a grid (grid must be
// strictly increasing and start at 0).
RateValidationReport validate_rate(const RateFunction& rate,
                                   const std::vector<double>& grid);

}  // namespace rhodich

#endif
