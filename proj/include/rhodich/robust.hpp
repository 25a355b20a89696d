#ifndef RHODICH_ROBUST_HPP
#define RHODICH_ROBUST_HPP

#include <functional>
#include <vector>

#include "rhodich/dichotomy.hpp"
#include "rhodich/funcspaces.hpp"
#include "rhodich/green.hpp"

namespace rhodich {

// Sampled-continuous perturbation B(t) with declared decay parameters of the
// bound ||B(t)|| <= delta e^{-(eps+a) rho(t)} rho'(t).
struct PerturbationFamily {
    std::function<MatrixXd(double)> B;
    double delta = 0.0;
    double a = 1.0;
    double eps = 0.0;
};

struct PerturbBoundReport {
    bool pass = false;
    double worst_ratio = 0.0;  // max ||B(t)|| e^{(eps+a) rho(t)} / rho'(t)
    double worst_t = 0.0;
};

PerturbBoundReport check_perturbation_bound(const PerturbationFamily& B,
                                            const RateFunction& rate,
                                            const std::vector<double>& grid);

struct PicardOptions {
    double tol = 1e-10;
    int max_iters = 60;
    int nodes_per_unit = 400;  // quadrature density in rho-time
};

struct PicardResult {
    MatrixXd value;                   // U(t,s) (or U(t,s)x when seeded)
    int iterations = 0;
    std::vector<double> step_distances;  // sup distance of successive iterates
    double residual = 0.0;            // Volterra-equation residual on the grid
};

// Picard iteration for U(t,s) = T(t,s) + int_s^t T(t,tau) B(tau) U(tau,s) dtau
// on a trapezoid grid over [s,t]. Throws NonConvergenceError past max_iters.
PicardResult solve_perturbed(const EvolutionFamily& family,
                             const PerturbationFamily& B, double t, double s,
                             const PicardOptions& opt = {});

// Wraps solve_perturbed into a cached EvolutionFamily.
EvolutionFamily perturbed_family(const EvolutionFamily& family,
                                 const PerturbationFamily& B,
                                 const PicardOptions& opt = {});

struct OperatorBoundsReport {
    bool pass = false;
    double worst_y1_ratio = 0.0;    // ||Bx||_1 / ((delta C / a) ||x||_inf)
    double worst_yinf_ratio = 0.0;  // ||Bx / rho'||_inf' / (delta C ||x||_inf)
    std::vector<double> y1_values;    // ||Bx||_1 per probe
    std::vector<double> yinf_values;  // ||Bx / rho'||_inf' per probe
};

// Verifies the two perturbation-operator bounds on probe functions; the graph
// norm is replaced by ||x||_inf, which only strengthens the check.
OperatorBoundsReport perturbation_operator_bounds(
    const PerturbationFamily& B, const NormFamily& norms, double C, double eps,
    const RateFunction& rate, const std::vector<SampledFunction>& probes,
    double slack = 1e-6);

struct RobustnessConfig {
    double T_max = 20.0;
    size_t detect_nodes = 201;       // projection / certificate grid density
    double horizon = 10.0;           // stable-subspace horizon
    double gap_margin = 0.2;
    size_t pair_count = 60;          // certificate sample pairs
    size_t probe_count = 6;
    unsigned seed = 20240601;
    PicardOptions picard;
};

struct RobustnessReport {
    DichotomyCertificate before;
    DichotomyCertificate after;
    double lambda_drop = 0.0;   // lambda_before - lambda_after
    double D_growth = 1.0;      // D_after / D_before
    double mild_identity_residual = 0.0;  // |perturbed-mild(x,y) - base-mild(x, y + Bx)|
    double stable_angle = 0.0;  // principal angle between the stable spaces at 0
};

// End-to-end robustness experiment: checks the perturbation bound, builds the
// Picard family, reruns the detection pipeline with the same norms and rate,
// and cross-checks the perturbed/unperturbed mild equations.
RobustnessReport robustness_experiment(const EvolutionFamily& family,
                                       const PerturbationFamily& B,
                                       const SubspaceZ& Z,
                                       const NormFamily& norms,
                                       const RateFunction& rate,
                                       const RobustnessConfig& config);

}  // namespace rhodich

#endif
