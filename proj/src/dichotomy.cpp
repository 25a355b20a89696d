#include "rhodich/dichotomy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace rhodich {

size_t ProjectionPath::index_of(double t) const {
    auto it = std::lower_bound(grid.begin(), grid.end(), t);
    if (it == grid.end()) return grid.size() - 1;
    size_t i = static_cast<size_t>(it - grid.begin());
    if (i == 0) return 0;
    // nearest node
    return (t - grid[i - 1] <= grid[i] - t) ? i - 1 : i;
}

ProjectionPath ProjectionPath::constant(std::vector<double> grid, const MatrixXd& P0) {
    ProjectionPath p;
    p.P.assign(grid.size(), P0);
    p.grid = std::move(grid);
    return p;
}

MatrixXd kernel_basis(const MatrixXd& P) {
    Eigen::Index d = P.rows();
    MatrixXd Q = MatrixXd::Identity(d, d) - P;
    Eigen::JacobiSVD<MatrixXd> svd(Q, Eigen::ComputeThinU);
    // nonzero singular values of a projection are >= 1, so 0.5 separates rank
    Eigen::Index k = 0;
    while (k < svd.singularValues().size() && svd.singularValues()(k) > 0.5) ++k;
    return svd.matrixU().leftCols(k);
}

namespace {

struct BackwardFactor {
    MatrixXd matrix;
    double condition = 1.0;
};

BackwardFactor backward_factor_impl(const EvolutionFamily& family,
                                    const ProjectionPath& proj, double t, double s,
                                    double cond_gate) {
    if (t > s) throw ArgumentError("backward_factor: requires t <= s");
    double tq = proj.grid[proj.index_of(t)];
    double sq = proj.grid[proj.index_of(s)];
    if (tq > sq) tq = sq;
    Eigen::Index d = family.dim();

    MatrixXd Ut = kernel_basis(proj.at(tq));
    MatrixXd Us = kernel_basis(proj.at(sq));
    BackwardFactor out;
    if (Ut.cols() == 0 || Us.cols() == 0) {
        out.matrix = MatrixXd::Zero(d, d);
        return out;
    }
    // coordinates of T(s,t)|_{Ker P(t)} between the two kernel bases; the
    // propagator uses the exact times so callers on finer grids than proj's
    // are not penalized by node quantization
    MatrixXd M = Us.transpose() * (family.propagator(s, t) * Ut);
    Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    out.condition = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(out.condition < cond_gate)) {
        std::ostringstream os;
        os << "kernel-restricted inverse of T(" << s << ", " << t
           << ") ill-conditioned (cond " << out.condition << ")";
        throw InvertibilityError(os.str(), out.condition);
    }
    MatrixXd Minv = svd.matrixV() * svd.singularValues().cwiseInverse().asDiagonal() *
                    svd.matrixU().transpose();
    MatrixXd Qs = proj.Q_at(sq);
    out.matrix = Ut * (Minv * (Us.transpose() * Qs));
    return out;
}

}  // namespace

MatrixXd backward_factor(const EvolutionFamily& family, const ProjectionPath& proj,
                         double t, double s, double cond_gate) {
    return backward_factor_impl(family, proj, t, s, cond_gate).matrix;
}

MatrixXd stable_subspace(const EvolutionFamily& family, const NormFamily& /*norms*/,
                         const RateFunction& rate, double tau, double H,
                         double eta) {
    double span = rate(tau + H) - rate(tau);
    if (span < 5.0)
        throw ArgumentError("stable_subspace: horizon too short, need rho-span >= 5");
    MatrixXd T = family.propagator(tau + H, tau);
    Eigen::JacobiSVD<MatrixXd> svd(T, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    Eigen::Index first_stable = sv.size();
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        double expo = sv(i) > 0.0 ? std::log(sv(i)) / span
                                  : -std::numeric_limits<double>::infinity();
        if (expo > -eta && expo < eta) {
            std::ostringstream os;
            os << "finite-time exponent " << expo << " inside the dead zone (-" << eta
               << ", " << eta << ") at tau=" << tau << ": no dichotomy detected";
            throw GapViolationError(os.str(), expo);
        }
        if (expo <= -eta && first_stable == sv.size()) first_stable = i;
    }
    return svd.matrixV().rightCols(sv.size() - first_stable);
}

MatrixXd unstable_subspace(const EvolutionFamily& family, const SubspaceZ& Z,
                           double tau) {
    Eigen::Index d = family.dim();
    if (Z.rank() == 0) return MatrixXd::Zero(d, 0);
    MatrixXd M = family.propagator(tau, 0.0) * Z.basis;
    Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > sv(0) * 1e-12) ++r;
    if (r < Z.rank()) {
        double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                              : std::numeric_limits<double>::infinity();
        std::ostringstream os;
        os << "T(" << tau << ",0) restricted to Z drops rank (" << r << " < "
           << Z.rank() << ")";
        throw InvertibilityError(os.str(), cond);
    }
    return svd.matrixU().leftCols(r);
}

ProjectionPath build_projections(const std::vector<double>& grid,
                                 const std::vector<MatrixXd>& S_bases,
                                 const std::vector<MatrixXd>& U_bases) {
    if (grid.size() != S_bases.size() || grid.size() != U_bases.size())
        throw ArgumentError("build_projections: one basis pair per grid node required");
    ProjectionPath path;
    path.grid = grid;
    for (size_t i = 0; i < grid.size(); ++i) {
        const MatrixXd& S = S_bases[i];
        const MatrixXd& U = U_bases[i];
        Eigen::Index d = S.rows();
        if (S.cols() + U.cols() != d)
            throw ArgumentError("build_projections: dim S + dim U != d at a node");
        if (S.cols() > 0 && U.cols() > 0) {
            Eigen::JacobiSVD<MatrixXd> angles(S.transpose() * U);
            double cos_min_angle = angles.singularValues().maxCoeff();
            double angle = std::acos(std::min(1.0, cos_min_angle));
            if (angle < 1e-6) {
                std::ostringstream os;
                os << "stable/unstable splitting degenerate at t=" << grid[i]
                   << " (principal angle " << angle << ")";
                throw DegenerateSplittingError(os.str());
            }
        }
        MatrixXd B(d, d);
        B.leftCols(S.cols()) = S;
        B.rightCols(U.cols()) = U;
        MatrixXd SP = MatrixXd::Zero(d, d);
        SP.leftCols(S.cols()) = S;
        // P = [S 0] B^{-1}: keep the S-coordinates of the splitting
        path.P.push_back(SP * B.partialPivLu().inverse());
    }
    return path;
}

namespace {

struct FitSamples {
    std::vector<double> gaps;  // rho(t) - rho(s)
    std::vector<double> rs;    // log of the probe-envelope decay ratio
};

double ls_slope(const FitSamples& s) {
    // least squares of r = alpha - lambda * gap; returns lambda
    double n = static_cast<double>(s.gaps.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < s.gaps.size(); ++i) {
        sx += s.gaps[i];
        sy += s.rs[i];
        sxx += s.gaps[i] * s.gaps[i];
        sxy += s.gaps[i] * s.rs[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom <= 0.0) return 0.0;
    return -(n * sxy - sx * sy) / denom;
}

}  // namespace

DichotomyCertificate estimate_certificate(
    const EvolutionFamily& family, const ProjectionPath& proj,
    const NormFamily& norms, const RateFunction& rate,
    const std::vector<std::pair<double, double>>& sample_pairs,
    const std::vector<VectorXd>& probes) {
    if (sample_pairs.empty() || probes.empty())
        throw ArgumentError("estimate_certificate: empty sample set");

    FitSamples fwd, bwd;
    CertificateDiagnostics diag;
    double M_bound = 0.0;
    const double tiny = 1e-300;

    for (const auto& [s, t] : sample_pairs) {
        if (t < s) throw ArgumentError("estimate_certificate: pair with t < s");
        double sq = proj.grid[proj.index_of(s)];
        double tq = proj.grid[proj.index_of(t)];
        if (tq < sq) continue;
        const MatrixXd& Ps = proj.at(sq);
        const MatrixXd& Pt = proj.at(tq);
        MatrixXd T = family.propagator(tq, sq);
        diag.commute_residual = std::max(
            diag.commute_residual, (T * Ps - Pt * T).norm() / (1.0 + T.norm()));
        diag.projection_defect =
            std::max(diag.projection_defect, (Ps * Ps - Ps).norm());

        BackwardFactor back{MatrixXd::Zero(family.dim(), family.dim()), 1.0};
        if (kernel_basis(Ps).cols() > 0)
            back = backward_factor_impl(family, proj, sq, tq, 1e8);
        diag.worst_condition = std::max(diag.worst_condition, back.condition);

        double gap = rate(tq) - rate(sq);
        double rf = -std::numeric_limits<double>::infinity();
        double rb = -std::numeric_limits<double>::infinity();
        for (const VectorXd& x : probes) {
            double ns = norms(sq, x);
            double nt_at_t = norms(tq, x);
            if (ns < tiny || nt_at_t < tiny) continue;
            double nf = norms(tq, (T * (Ps * x)).eval());
            if (nf > tiny) rf = std::max(rf, std::log(nf / ns));
            double nb = norms(sq, (back.matrix * x).eval());
            if (nb > tiny) rb = std::max(rb, std::log(nb / nt_at_t));
            M_bound = std::max(M_bound, norms(sq, (Ps * x).eval()) / ns);
        }
        if (std::isfinite(rf)) {
            fwd.gaps.push_back(gap);
            fwd.rs.push_back(rf);
        }
        if (std::isfinite(rb)) {
            bwd.gaps.push_back(gap);
            bwd.rs.push_back(rb);
        }
    }

    if (fwd.gaps.empty() && bwd.gaps.empty())
        throw NoDichotomyError("estimate_certificate: no usable decay samples");

    double lambda = std::numeric_limits<double>::infinity();
    if (!fwd.gaps.empty()) lambda = std::min(lambda, ls_slope(fwd));
    if (!bwd.gaps.empty()) lambda = std::min(lambda, ls_slope(bwd));
    if (!(lambda > 0.0)) {
        std::ostringstream os;
        os << "no dichotomy detected: best-fit lambda = " << lambda;
        throw NoDichotomyError(os.str());
    }

    double logD = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < fwd.gaps.size(); ++i)
        logD = std::max(logD, fwd.rs[i] + lambda * fwd.gaps[i]);
    for (size_t i = 0; i < bwd.gaps.size(); ++i)
        logD = std::max(logD, bwd.rs[i] + lambda * bwd.gaps[i]);

    DichotomyCertificate cert;
    cert.proj = proj;
    cert.lambda = lambda;
    cert.D = std::exp(logD);
    cert.M = M_bound;
    cert.diagnostics = diag;
    return cert;
}

VerifyReport verify_dichotomy(const EvolutionFamily& family,
                              const DichotomyCertificate& cert,
                              const NormFamily& norms, const RateFunction& rate,
                              const std::vector<std::pair<double, double>>& pairs,
                              const std::vector<VectorXd>& probes,
                              double tolerance) {
    VerifyReport rep;
    rep.tolerance = tolerance;
    const ProjectionPath& proj = cert.proj;
    const double tiny = 1e-300;
    const double logD = std::log(cert.D);

    for (const auto& [s, t] : pairs) {
        double sq = proj.grid[proj.index_of(s)];
        double tq = proj.grid[proj.index_of(t)];
        if (tq < sq) continue;
        const MatrixXd& Ps = proj.at(sq);
        const MatrixXd& Pt = proj.at(tq);
        MatrixXd T = family.propagator(tq, sq);
        rep.diagnostics.commute_residual =
            std::max(rep.diagnostics.commute_residual,
                     (T * Ps - Pt * T).norm() / (1.0 + T.norm()));
        rep.diagnostics.projection_defect =
            std::max(rep.diagnostics.projection_defect, (Ps * Ps - Ps).norm());

        BackwardFactor back{MatrixXd::Zero(family.dim(), family.dim()), 1.0};
        if (kernel_basis(Ps).cols() > 0)
            back = backward_factor_impl(family, proj, sq, tq, 1e8);
        rep.diagnostics.worst_condition =
            std::max(rep.diagnostics.worst_condition, back.condition);

        double gap = rate(tq) - rate(sq);
        for (const VectorXd& x : probes) {
            double ns = norms(sq, x);
            double nt = norms(tq, x);
            if (ns < tiny || nt < tiny) continue;
            double nf = norms(tq, (T * (Ps * x)).eval());
            if (nf > tiny) {
                double slack =
                    std::exp(std::log(nf / ns) - (logD - cert.lambda * gap)) - 1.0;
                if (slack > rep.diagnostics.d1_slack) {
                    rep.diagnostics.d1_slack = slack;
                    rep.d1_worst_t = tq;
                    rep.d1_worst_s = sq;
                }
            }
            double nb = norms(sq, (back.matrix * x).eval());
            if (nb > tiny) {
                double slack =
                    std::exp(std::log(nb / nt) - (logD - cert.lambda * gap)) - 1.0;
                if (slack > rep.diagnostics.d2_slack) {
                    rep.diagnostics.d2_slack = slack;
                    rep.d2_worst_t = sq;
                    rep.d2_worst_s = tq;
                }
            }
        }
    }

    rep.pass = rep.diagnostics.d1_slack <= tolerance &&
               rep.diagnostics.d2_slack <= tolerance &&
               rep.diagnostics.commute_residual <= 1e-6 + tolerance &&
               rep.diagnostics.projection_defect <= 1e-8;
    return rep;
}

std::vector<std::pair<double, double>> sample_time_pairs(double T_max,
                                                         size_t count,
                                                         unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, T_max);
    std::vector<std::pair<double, double>> pairs;
    pairs.emplace_back(0.0, T_max);
    pairs.emplace_back(0.0, 0.5 * T_max);
    pairs.emplace_back(0.5 * T_max, T_max);
    while (pairs.size() < count) {
        double a = uni(rng), b = uni(rng);
        if (a > b) std::swap(a, b);
        pairs.emplace_back(a, b);
    }
    return pairs;
}

std::vector<VectorXd> sample_probes(int dim, size_t count, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<VectorXd> probes;
    for (int i = 0; i < dim; ++i)
        probes.push_back(VectorXd::Unit(dim, i));
    while (probes.size() < count + static_cast<size_t>(dim)) {
        VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
        if (v.norm() > 1e-6) probes.push_back(v.normalized());
    }
    return probes;
}

DichotomyCertificate detect_dichotomy(const EvolutionFamily& family,
                                      const SubspaceZ& Z, const NormFamily& norms,
                                      const RateFunction& rate,
                                      const DetectOptions& opt) {
    if (opt.nodes < 2 || opt.T_max <= 0.0)
        throw ArgumentError("detect_dichotomy: need T_max > 0 and >= 2 grid nodes");
    std::vector<double> grid(opt.nodes);
    for (size_t i = 0; i < opt.nodes; ++i)
        grid[i] = opt.T_max * static_cast<double>(i) /
                  static_cast<double>(opt.nodes - 1);

    std::vector<MatrixXd> S_bases, U_bases;
    S_bases.reserve(grid.size());
    U_bases.reserve(grid.size());
    for (double tau : grid) {
        double H = rate.inverse(rate(tau) + opt.rho_span) - tau;
        S_bases.push_back(stable_subspace(family, norms, rate, tau, H,
                                          opt.gap_margin));
        U_bases.push_back(unstable_subspace(family, Z, tau));
    }
    ProjectionPath proj = build_projections(grid, S_bases, U_bases);

    auto pairs = sample_time_pairs(opt.T_max, opt.pair_count, opt.seed);
    auto probes = sample_probes(family.dim(), opt.probe_count, opt.seed + 1);
    return estimate_certificate(family, proj, norms, rate, pairs, probes);
}

std::string certificate_to_text(const DichotomyCertificate& cert) {
    std::ostringstream os;
    os.precision(17);
    Eigen::Index d = cert.proj.P.empty() ? 0 : cert.proj.P[0].rows();
    os << "rhodich-certificate v1\n";
    os << "dim " << d << "\n";
    os << "nodes " << cert.proj.grid.size() << "\n";
    os << "D " << cert.D << "\n";
    os << "lambda " << cert.lambda << "\n";
    os << "M " << cert.M << "\n";
    os << "d1_slack " << cert.diagnostics.d1_slack << "\n";
    os << "d2_slack " << cert.diagnostics.d2_slack << "\n";
    os << "commute " << cert.diagnostics.commute_residual << "\n";
    os << "condition " << cert.diagnostics.worst_condition << "\n";
    os << "proj_defect " << cert.diagnostics.projection_defect << "\n";
    for (size_t i = 0; i < cert.proj.grid.size(); ++i) {
        os << "node " << cert.proj.grid[i];
        const MatrixXd& P = cert.proj.P[i];
        for (Eigen::Index r = 0; r < P.rows(); ++r)
            for (Eigen::Index c = 0; c < P.cols(); ++c) os << " " << P(r, c);
        os << "\n";
    }
    return os.str();
}

DichotomyCertificate certificate_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    if (line != "rhodich-certificate v1")
        throw ArgumentError("certificate_from_text: unrecognized header");
    DichotomyCertificate cert;
    Eigen::Index d = 0;
    size_t nodes = 0;
    std::string key;
    while (is >> key) {
        if (key == "dim") is >> d;
        else if (key == "nodes") is >> nodes;
        else if (key == "D") is >> cert.D;
        else if (key == "lambda") is >> cert.lambda;
        else if (key == "M") is >> cert.M;
        else if (key == "d1_slack") is >> cert.diagnostics.d1_slack;
        else if (key == "d2_slack") is >> cert.diagnostics.d2_slack;
        else if (key == "commute") is >> cert.diagnostics.commute_residual;
        else if (key == "condition") is >> cert.diagnostics.worst_condition;
        else if (key == "proj_defect") is >> cert.diagnostics.projection_defect;
        else if (key == "node") {
            double t;
            is >> t;
            MatrixXd P(d, d);
            for (Eigen::Index r = 0; r < d; ++r)
                for (Eigen::Index c = 0; c < d; ++c) is >> P(r, c);
            cert.proj.grid.push_back(t);
            cert.proj.P.push_back(P);
        } else {
            throw ArgumentError("certificate_from_text: unknown key " + key);
        }
    }
    if (cert.proj.grid.size() != nodes)
        throw ArgumentError("certificate_from_text: node count mismatch");
    return cert;
}

}  // namespace rhodich
