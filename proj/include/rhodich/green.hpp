#ifndef RHODICH_GREEN_HPP
#define RHODICH_GREEN_HPP

#include <optional>
#include <vector>

#include "rhodich/dichotomy.hpp"
#include "rhodich/funcspaces.hpp"

namespace rhodich {

struct GreenResult {
    SampledFunction x;
    // truncation bound for the cut-off backward integral, per output node
    // maximum: D e^{-lambda (rho(T_max) - rho(t))} ||y||_1 when a certificate
    // is attached, 0 otherwise.
    double truncation_bound = 0.0;
};

// Mild solution of the (Yinf^Z, Y1) admissibility problem:
// x(t) = int_0^t T(t,s)P(s)y(s) ds - int_t^Tmax T(t,s)Q(s)y(s) ds,
// with the backward factor realized through kernel-restricted inverses.
// The quadrature is composite trapezoid on y's grid, accumulated through the
// cocycle so each step only needs adjacent-node propagators.
GreenResult green_y1(const EvolutionFamily& family, const ProjectionPath& proj,
                     const NormFamily& norms, const SampledFunction& y,
                     const RateFunction& rate,
                     const DichotomyCertificate* cert = nullptr);

// Same with integrand weight rho'(s) (the (Yinf^Z, Yinf') problem).
GreenResult green_yinf(const EvolutionFamily& family, const ProjectionPath& proj,
                       const NormFamily& norms, const RateFunction& rate,
                       const SampledFunction& y,
                       const DichotomyCertificate* cert = nullptr);

// Max over pairs (s,t), t >= s, of
// ||x(t) - T(t,s)x(s) - int_s^t w(tau) T(t,tau) y(tau) dtau|| / (1 + ||x(t)||),
// with w = rho' when weighted, else 1. Times quantize to x's grid.
double mild_residual(const EvolutionFamily& family, const SampledFunction& x,
                     const SampledFunction& y, bool weighted,
                     const RateFunction& rate,
                     const std::vector<std::pair<double, double>>& pairs);

enum class AdmissibilityPair { Y1, YinfPrime };

struct AdmissibilityReport {
    AdmissibilityPair pair;
    bool solvable = false;
    double bound_estimate = 0.0;    // max ||x||_inf / ||y||_input over the suite
    double uniqueness_margin = 0.0; // decay ratio of homogeneous candidates
    std::vector<size_t> witnesses;  // indices of unsolvable suite members
    std::vector<double> candidate_sups;  // sup-norm of each candidate
    // note: uniqueness is certified only against the shooting parametrization
    // plus the homogeneous-decay margin, a weaker check than full-space
    // uniqueness
};

struct ProbeOptions {
    double budget = 1e6;         // sup-norm budget B_max
    double uniqueness_tol = 1e-8;  // smallest normal-matrix eigenvalue for a
                                   // unique shooting minimizer
};

// Shooting probe of the two admissibility hypotheses: parametrize x(0) = Z c,
// propagate the mild equation forward, pick the least-squares c (minimal-norm
// tie break), and call y solvable iff the candidate stays within the budget.
AdmissibilityReport admissibility_probe(const EvolutionFamily& family,
                                        const SubspaceZ& Z,
                                        const NormFamily& norms,
                                        const RateFunction& rate,
                                        const std::vector<SampledFunction>& suite,
                                        AdmissibilityPair pair,
                                        const ProbeOptions& opt = {});

}  // namespace rhodich

#endif
