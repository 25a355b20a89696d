#ifndef RHODICH_ADAPTED_HPP
#define RHODICH_ADAPTED_HPP

#include <memory>
#include <vector>

#include "rhodich/dichotomy.hpp"

namespace rhodich {

struct AdaptedNormOptions {
    // lambda used in the two-supremum formula; 0 means "half the certificate
    // lambda" so the forward supremand provably decays under fit error.
    double lambda = 0.0;
    double H_sup = 8.0;            // forward truncation horizon, in rho-units
    int nodes_per_rho_unit = 64;   // supremum lattice density
};

// Lyapunov norms built from a verified certificate:
//   ||x||_t = sup_{tau >= t} e^{lambda (rho(tau)-rho(t))} ||T(tau,t)P(t)x||
//           + sup_{tau in [0,t]} e^{lambda (rho(t)-rho(tau))} ||T(tau,t)Q(t)x||,
// truncated suprema over a global rho-lattice, backward factors through
// kernel-restricted inverses.
class AdaptedNormFamily {
  public:
    AdaptedNormFamily(const EvolutionFamily& family,
                      std::shared_ptr<const DichotomyCertificate> cert,
                      const RateFunction& rate, AdaptedNormOptions opt = {});

    // Throws HorizonTooShortError when the forward supremand is still
    // increasing at the truncation edge.
    double eval(double t, const VectorXd& x) const;
    double lambda() const { return lambda_; }

    // Adapter usable by every operation taking a NormFamily.
    NormFamily as_norm_family() const;

  private:
    const EvolutionFamily* family_;
    std::shared_ptr<const DichotomyCertificate> cert_;
    RateFunction rate_;
    double lambda_;
    AdaptedNormOptions opt_;
};

double adapted_norm_eval(const EvolutionFamily& family,
                         const DichotomyCertificate& cert,
                         const RateFunction& rate, double t, const VectorXd& x,
                         double lambda, double H_sup,
                         int nodes_per_rho_unit = 64);

struct UniformityReport {
    bool pass = false;
    double worst_forward_ratio = 0.0;   // vs e^{-lambda gap}, D = 1
    double worst_backward_ratio = 0.0;
    double tolerance = 1.05;
};

// Checks that the adapted norms uniformize the dichotomy: the (d1)/(d2)
// ratios against e^{-lambda gap} stay below 1 + truncation slack.
UniformityReport adapted_uniformity_check(
    const EvolutionFamily& family, const DichotomyCertificate& cert,
    const RateFunction& rate, const AdaptedNormFamily& adapted,
    const std::vector<std::pair<double, double>>& sample_pairs,
    const std::vector<VectorXd>& probes, double tolerance = 1.05);

struct EquivalenceReport {
    double C_hat = 1.0;
    double eps_hat = 0.0;
    bool pass = false;       // C_hat <= 2 D_hat + tolerance
    double recovered_slack = 0.0;  // worst excess of the recovered
                                   // nonuniform-dichotomy bound on probes
};

// Runs norm_bounds_estimate on the adapted family and checks the C = 2D
// sandwich plus the recovered nonuniform decay bound D_hat * C_hat.
EquivalenceReport adapted_equivalence_check(
    const EvolutionFamily& family, const DichotomyCertificate& cert,
    const RateFunction& rate, const AdaptedNormFamily& adapted,
    const std::vector<double>& grid, const std::vector<VectorXd>& probes,
    double tolerance = 0.05);

}  // namespace rhodich

#endif
