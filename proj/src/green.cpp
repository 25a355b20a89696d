#include "rhodich/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rhodich {

namespace {

// Shared mild-solution quadrature: forward integral through P accumulated via
// the cocycle, backward integral through Q accumulated via kernel-restricted
// inverses. weight(s) = 1 for the Y1 problem, rho'(s) for the Yinf' problem.
GreenResult green_common(const EvolutionFamily& family, const ProjectionPath& proj,
                         const NormFamily& norms, const SampledFunction& y,
                         const std::function<double(double)>& weight,
                         const DichotomyCertificate* cert) {
    const auto& g = y.grid();
    const size_t n = g.size();
    const Eigen::Index d = family.dim();

    std::vector<VectorXd> F(n), G(n);
    F[0] = VectorXd::Zero(d);
    for (size_t i = 0; i + 1 < n; ++i) {
        double h = g[i + 1] - g[i];
        MatrixXd T = family.propagator(g[i + 1], g[i]);
        VectorXd lo = weight(g[i]) * (proj.at(g[i]) * y.at_node(i));
        VectorXd hi = weight(g[i + 1]) * (proj.at(g[i + 1]) * y.at_node(i + 1));
        F[i + 1] = T * (F[i] + 0.5 * h * lo) + 0.5 * h * hi;
    }
    G[n - 1] = VectorXd::Zero(d);
    bool has_kernel = kernel_basis(proj.at(g[0])).cols() > 0;
    for (size_t i = n - 1; i-- > 0;) {
        double h = g[i + 1] - g[i];
        if (!has_kernel) {
            G[i] = VectorXd::Zero(d);
            continue;
        }
        MatrixXd Tb = backward_factor(family, proj, g[i], g[i + 1]);
        VectorXd lo = weight(g[i]) * (proj.Q_at(g[i]) * y.at_node(i));
        VectorXd hi = weight(g[i + 1]) * (proj.Q_at(g[i + 1]) * y.at_node(i + 1));
        G[i] = Tb * (G[i + 1] + 0.5 * h * hi) + 0.5 * h * lo;
    }

    MatrixXd vals(d, static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i)
        vals.col(static_cast<Eigen::Index>(i)) = F[i] - G[i];

    GreenResult out{SampledFunction(std::vector<double>(g), std::move(vals)), 0.0};
    if (cert) {
        // tail mass of y beyond T_max is only known through its decay
        // annotation; without one the cut-off is exact
        double tail_mass = y1_norm(y, norms).tail_bound;
        out.truncation_bound = cert->D * tail_mass;
    }
    return out;
}

}  // namespace

GreenResult green_y1(const EvolutionFamily& family, const ProjectionPath& proj,
                     const NormFamily& norms, const SampledFunction& y,
                     const RateFunction& /*rate*/,
                     const DichotomyCertificate* cert) {
    return green_common(family, proj, norms, y, [](double) { return 1.0; }, cert);
}

GreenResult green_yinf(const EvolutionFamily& family, const ProjectionPath& proj,
                       const NormFamily& norms, const RateFunction& rate,
                       const SampledFunction& y,
                       const DichotomyCertificate* cert) {
    return green_common(family, proj, norms, y,
                        [&rate](double s) { return rate.deriv(s); }, cert);
}

double mild_residual(const EvolutionFamily& family, const SampledFunction& x,
                     const SampledFunction& y, bool weighted,
                     const RateFunction& rate,
                     const std::vector<std::pair<double, double>>& pairs) {
    const auto& g = x.grid();
    auto node_index = [&g](double t) {
        auto it = std::lower_bound(g.begin(), g.end(), t);
        if (it == g.end()) return g.size() - 1;
        size_t i = static_cast<size_t>(it - g.begin());
        if (i == 0) return size_t{0};
        return (t - g[i - 1] <= g[i] - t) ? i - 1 : i;
    };
    auto w = [&](double s) { return weighted ? rate.deriv(s) : 1.0; };

    double worst = 0.0;
    for (const auto& [s, t] : pairs) {
        if (t < s) throw ArgumentError("mild_residual: pair with t < s");
        size_t i = node_index(s), j = node_index(t);
        if (j < i) std::swap(i, j);
        VectorXd I = VectorXd::Zero(x.dim());
        for (size_t k = i; k < j; ++k) {
            double h = g[k + 1] - g[k];
            MatrixXd T = family.propagator(g[k + 1], g[k]);
            I = T * (I + 0.5 * h * w(g[k]) * y.eval(g[k])) +
                0.5 * h * w(g[k + 1]) * y.eval(g[k + 1]);
        }
        VectorXd lhs = x.at_node(j) - family.propagator(g[j], g[i]) * x.at_node(i) - I;
        double r = lhs.norm() / (1.0 + x.at_node(j).norm());
        worst = std::max(worst, r);
    }
    return worst;
}

AdmissibilityReport admissibility_probe(const EvolutionFamily& family,
                                        const SubspaceZ& Z,
                                        const NormFamily& norms,
                                        const RateFunction& rate,
                                        const std::vector<SampledFunction>& suite,
                                        AdmissibilityPair pair,
                                        const ProbeOptions& opt) {
    if (suite.empty()) throw ArgumentError("admissibility_probe: empty suite");
    AdmissibilityReport rep;
    rep.pair = pair;
    const Eigen::Index d = family.dim();
    const Eigen::Index k = Z.rank();
    const bool weighted = pair == AdmissibilityPair::YinfPrime;
    auto w = [&](double s) { return weighted ? rate.deriv(s) : 1.0; };

    bool all_ok = true;
    double bound = 0.0;
    double overall_tmax = 0.0;

    for (size_t m = 0; m < suite.size(); ++m) {
        const SampledFunction& y = suite[m];
        const auto& g = y.grid();
        overall_tmax = std::max(overall_tmax, g.back());
        const size_t n = g.size();

        std::vector<VectorXd> xp(n);
        std::vector<MatrixXd> H(n);
        xp[0] = VectorXd::Zero(d);
        H[0] = Z.basis;
        for (size_t i = 0; i + 1 < n; ++i) {
            double h = g[i + 1] - g[i];
            MatrixXd T = family.propagator(g[i + 1], g[i]);
            xp[i + 1] = T * (xp[i] + 0.5 * h * w(g[i]) * y.at_node(i)) +
                        0.5 * h * w(g[i + 1]) * y.at_node(i + 1);
            if (k > 0) H[i + 1] = T * H[i];
        }

        VectorXd c = VectorXd::Zero(k);
        bool unique = true;
        if (k > 0) {
            MatrixXd N = MatrixXd::Zero(k, k);
            VectorXd b = VectorXd::Zero(k);
            for (size_t i = 0; i < n; ++i) {
                N += H[i].transpose() * H[i];
                b -= H[i].transpose() * xp[i];
            }
            Eigen::SelfAdjointEigenSolver<MatrixXd> eig(N);
            unique = eig.eigenvalues().minCoeff() > opt.uniqueness_tol;
            // minimal-norm least-squares tie break
            VectorXd inv_ev = eig.eigenvalues().unaryExpr([&](double v) {
                return v > opt.uniqueness_tol ? 1.0 / v : 0.0;
            });
            c = eig.eigenvectors() * inv_ev.asDiagonal() *
                (eig.eigenvectors().transpose() * b);
        }

        double sup = 0.0;
        for (size_t i = 0; i < n; ++i) {
            VectorXd xi = k > 0 ? (H[i] * c + xp[i]).eval() : xp[i];
            sup = std::max(sup, norms(g[i], xi));
        }
        rep.candidate_sups.push_back(sup);

        double input = weighted ? yinf_norm(y, norms).value : y1_norm(y, norms).value;
        if (input > 0.0) bound = std::max(bound, sup / input);

        bool ok = unique && std::isfinite(sup) && sup <= opt.budget;
        if (!ok) {
            all_ok = false;
            rep.witnesses.push_back(m);
        }
    }

    if (k > 0) {
        double margin = 0.0;
        MatrixXd HT = family.propagator(overall_tmax, 0.0) * Z.basis;
        for (Eigen::Index j = 0; j < k; ++j) {
            double denom = norms(0.0, Z.basis.col(j).eval());
            if (denom > 0.0)
                margin = std::max(margin,
                                  norms(overall_tmax, HT.col(j).eval()) / denom);
        }
        rep.uniqueness_margin = margin;
    }
    rep.solvable = all_ok;
    rep.bound_estimate = bound;
    return rep;
}

}  // namespace rhodich
