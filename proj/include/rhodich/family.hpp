#ifndef RHODICH_FAMILY_HPP
#define RHODICH_FAMILY_HPP

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "rhodich/errors.hpp"
#include "rhodich/rates.hpp"

namespace rhodich {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Two-parameter propagator T(t,s), t >= s >= 0, on R^d. Closed-form sources
// evaluate a user map; ODE sources integrate the matrix equation
// M' = A(t) M, M(s) = Id with adaptive Dormand-Prince 4(5) steps.
// Propagator matrices are cached keyed by (t,s); the cache tolerates
// concurrent insertion of identical keys.
class EvolutionFamily {
  public:
    static EvolutionFamily closed_form(int dim,
                                       std::function<MatrixXd(double, double)> map,
                                       bool discontinuous = false);
    static EvolutionFamily ode(int dim, std::function<MatrixXd(double)> A,
                               double tol = 1e-10);

    // Default-constructed families are placeholders; propagator() throws
    // until a factory-made family is assigned.
    EvolutionFamily() = default;

    MatrixXd propagator(double t, double s) const;
    int dim() const { return dim_; }
    bool discontinuous() const { return discontinuous_; }
    bool is_ode() const { return static_cast<bool>(A_); }
    double integrator_tol() const { return tol_; }

  private:
    int dim_ = 0;
    bool discontinuous_ = false;
    std::function<MatrixXd(double, double)> map_;
    std::function<MatrixXd(double)> A_;
    double tol_ = 1e-10;
    struct Cache {
        std::map<std::pair<double, double>, MatrixXd> entries;
        std::mutex mu;
    };
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

// Max over triples (t,s,tau), t >= s >= tau, of
// ||T(t,s)T(s,tau) - T(t,tau)|| / (1 + ||T(t,tau)||).
double cocycle_residual(const EvolutionFamily& family,
                        const std::vector<std::array<double, 3>>& triples);

// Time-indexed norms ||.||_t over a Euclidean base norm, with optional
// claimed equivalence constants (C, eps) of the two-sided sandwich.
struct NormFamily {
    std::function<double(double, const VectorXd&)> eval;
    std::optional<std::pair<double, double>> claimed;  // (C, eps)

    double operator()(double t, const VectorXd& x) const { return eval(t, x); }
    static NormFamily base();
};

struct NormBoundsEstimate {
    double C = 1.0;
    double eps = 0.0;
    double max_slack_active = 0.0;   // slack at the supporting samples
    double worst_lower_violation = 0.0;  // max of ||x|| - ||x||_t over samples
};

// Fits the tightest upper envelope log||x||_t <= log C + eps * rho(t) over the
// grid and probe vectors (eps clamped at 0) and checks the lower bound
// ||x|| <= ||x||_t. Throws NormLowerBoundError on a lower-bound violation.
NormBoundsEstimate norm_bounds_estimate(const NormFamily& norms,
                                        const RateFunction& rate,
                                        const std::vector<double>& grid,
                                        const std::vector<VectorXd>& probes);

}  // namespace rhodich

#endif
