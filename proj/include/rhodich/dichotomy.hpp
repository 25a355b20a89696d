#ifndef RHODICH_DICHOTOMY_HPP
#define RHODICH_DICHOTOMY_HPP

#include <string>
#include <vector>

#include "rhodich/family.hpp"
#include "rhodich/funcspaces.hpp"
#include "rhodich/rates.hpp"

namespace rhodich {

// Projection matrices P(t) on a time grid. Operators quantize (t,s) to the
// nearest grid node; projections are never interpolated.
struct ProjectionPath {
    std::vector<double> grid;
    std::vector<MatrixXd> P;

    size_t index_of(double t) const;
    const MatrixXd& at(double t) const { return P[index_of(t)]; }
    MatrixXd Q_at(double t) const {
        const MatrixXd& p = at(t);
        return MatrixXd::Identity(p.rows(), p.cols()) - p;
    }

    // Constant path (e.g. P = Id for scalar contractions).
    static ProjectionPath constant(std::vector<double> grid, const MatrixXd& P0);
};

struct CertificateDiagnostics {
    double d1_slack = 0.0;       // worst relative excess of the forward bound
    double d2_slack = 0.0;       // worst relative excess of the backward bound
    double commute_residual = 0.0;  // worst (pro) residual
    double worst_condition = 1.0;   // kernel-restricted inverse conditioning
    double projection_defect = 0.0; // worst ||P^2 - P||
};

struct DichotomyCertificate {
    ProjectionPath proj;
    double D = 1.0;
    double lambda = 0.0;
    double M = 1.0;  // projection-norm bound on probes
    CertificateDiagnostics diagnostics;
};

// Orthonormal basis of range Q(t) = Ker P(t) (columns; may be empty).
MatrixXd kernel_basis(const MatrixXd& P);

// Backward factor x -> T(t,s)Q(s)x for t <= s, realized as the inverse of
// T(s,t) restricted to Ker P(t). Throws InvertibilityError when the
// restricted matrix has condition number above cond_gate.
MatrixXd backward_factor(const EvolutionFamily& family, const ProjectionPath& proj,
                         double t, double s, double cond_gate = 1e8);

// Finite-time SVD classification of S(tau): right singular directions of
// T(tau+H, tau) whose rho-exponent lies below -eta. Requires a spectral gap
// (no exponent inside (-eta, eta)); throws GapViolationError otherwise.
MatrixXd stable_subspace(const EvolutionFamily& family, const NormFamily& norms,
                         const RateFunction& rate, double tau, double H,
                         double eta);

// Orthonormalized T(tau,0) Z with rank check against dim Z.
MatrixXd unstable_subspace(const EvolutionFamily& family, const SubspaceZ& Z,
                           double tau);

// Oblique projections P(tau) onto S(tau) along U(tau), one per grid node.
// Throws DegenerateSplittingError when the minimal principal angle between the
// two bases drops below 1e-6.
ProjectionPath build_projections(const std::vector<double>& grid,
                                 const std::vector<MatrixXd>& S_bases,
                                 const std::vector<MatrixXd>& U_bases);

// Fit of the two dichotomy inequalities over sample pairs (s,t), t >= s, and
// probe vectors: lambda from least squares on log-decay vs rho-gap, D from the
// zero-violation envelope at that lambda. Throws NoDichotomyError when the
// fitted lambda is not positive.
DichotomyCertificate estimate_certificate(
    const EvolutionFamily& family, const ProjectionPath& proj,
    const NormFamily& norms, const RateFunction& rate,
    const std::vector<std::pair<double, double>>& sample_pairs,
    const std::vector<VectorXd>& probes);

struct VerifyReport {
    bool pass = false;
    CertificateDiagnostics diagnostics;
    double tolerance = 0.0;
    // worst offender of each bound, for reporting
    double d1_worst_t = 0.0, d1_worst_s = 0.0;
    double d2_worst_t = 0.0, d2_worst_s = 0.0;
};

// Recomputes the worst slacks of (d1), (d2), (pro) and the projection algebra
// on a verification grid (typically finer than estimation used).
VerifyReport verify_dichotomy(const EvolutionFamily& family,
                              const DichotomyCertificate& cert,
                              const NormFamily& norms, const RateFunction& rate,
                              const std::vector<std::pair<double, double>>& pairs,
                              const std::vector<VectorXd>& probes,
                              double tolerance = 1e-6);

struct DetectOptions {
    double T_max = 20.0;
    size_t nodes = 201;        // projection grid density over [0, T_max]
    double rho_span = 6.0;     // stable-subspace horizon, per node, in rho-units
    double gap_margin = 0.2;
    size_t pair_count = 60;    // random certificate sample pairs
    size_t probe_count = 6;    // random probe vectors (axes are always added)
    unsigned seed = 20240601;
};

// Full detection pipeline: stable/unstable subspaces on the grid, oblique
// projections, certificate fit. The per-node horizon is chosen so that
// rho(tau + H) - rho(tau) = rho_span.
DichotomyCertificate detect_dichotomy(const EvolutionFamily& family,
                                      const SubspaceZ& Z, const NormFamily& norms,
                                      const RateFunction& rate,
                                      const DetectOptions& opt);

// Deterministic sampling helpers shared by detection, verification and the CLI
// (seeded, so identical configs give identical reports).
std::vector<std::pair<double, double>> sample_time_pairs(double T_max,
                                                         size_t count,
                                                         unsigned seed);
std::vector<VectorXd> sample_probes(int dim, size_t count, unsigned seed);

// Serialization of certificates (structured text, consumed by the other
// modules and the CLI).
std::string certificate_to_text(const DichotomyCertificate& cert);
DichotomyCertificate certificate_from_text(const std::string& text);

}  // namespace rhodich

#endif
