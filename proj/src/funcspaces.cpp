#include "rhodich/funcspaces.hpp"

#include <algorithm>
#include <cmath>

namespace rhodich {

SampledFunction::SampledFunction(std::vector<double> grid, MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (grid_.size() < 2 || static_cast<size_t>(values_.cols()) != grid_.size())
        throw ArgumentError("SampledFunction: grid and values must have equal length >= 2");
    if (grid_.front() != 0.0)
        throw ArgumentError("SampledFunction: grid must start at 0");
    for (size_t i = 1; i < grid_.size(); ++i)
        if (grid_[i] <= grid_[i - 1])
            throw ArgumentError("SampledFunction: grid not strictly increasing");
}

VectorXd SampledFunction::eval(double t) const {
    if (t <= 0.0) return values_.col(0);
    if (t >= grid_.back()) {
        if (t > grid_.back() && !const_extend_)
            throw ArgumentError("SampledFunction: evaluation beyond T_max without constant-extension flag");
        return values_.col(values_.cols() - 1);
    }
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    Eigen::Index i = static_cast<Eigen::Index>(it - grid_.begin()) - 1;
    double w = (t - grid_[static_cast<size_t>(i)]) /
               (grid_[static_cast<size_t>(i) + 1] - grid_[static_cast<size_t>(i)]);
    return (1.0 - w) * values_.col(i) + w * values_.col(i + 1);
}

SampledFunction SampledFunction::from_function(
    const std::function<VectorXd(double)>& f, double T, size_t n) {
    if (n < 2) throw ArgumentError("from_function: need n >= 2 nodes");
    std::vector<double> grid(n);
    VectorXd probe = f(0.0);
    MatrixXd vals(probe.size(), static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) {
        grid[i] = T * static_cast<double>(i) / static_cast<double>(n - 1);
        vals.col(static_cast<Eigen::Index>(i)) = f(grid[i]);
    }
    return SampledFunction(std::move(grid), std::move(vals));
}

SampledFunction SampledFunction::indicator(double a, double b, const VectorXd& v,
                                           double T, size_t n) {
    if (!(0.0 <= a && a < b && b <= T))
        throw ArgumentError("indicator: need 0 <= a < b <= T");
    const double jump = 1e-9;
    std::vector<double> grid;
    for (size_t i = 0; i < n; ++i)
        grid.push_back(T * static_cast<double>(i) / static_cast<double>(n - 1));
    // jump nodes: value switches just after a and just after b
    auto insert_node = [&grid](double x) {
        auto it = std::lower_bound(grid.begin(), grid.end(), x);
        if (it == grid.end() || std::abs(*it - x) > 1e-15) grid.insert(it, x);
    };
    if (a > 0.0) { insert_node(a); insert_node(a - jump); }
    insert_node(b);
    if (b + jump < T) insert_node(b + jump);
    MatrixXd vals(v.size(), static_cast<Eigen::Index>(grid.size()));
    for (size_t i = 0; i < grid.size(); ++i) {
        bool inside = grid[i] >= a && grid[i] <= b;
        vals.col(static_cast<Eigen::Index>(i)) = inside ? v : VectorXd::Zero(v.size()).eval();
    }
    return SampledFunction(std::move(grid), std::move(vals));
}

SubspaceZ SubspaceZ::span(const std::vector<VectorXd>& vecs) {
    if (vecs.empty()) throw ArgumentError("SubspaceZ::span: empty generator set");
    MatrixXd A(vecs[0].size(), static_cast<Eigen::Index>(vecs.size()));
    for (size_t i = 0; i < vecs.size(); ++i) A.col(static_cast<Eigen::Index>(i)) = vecs[i];
    Eigen::ColPivHouseholderQR<MatrixXd> qr(A);
    Eigen::Index r = qr.rank();
    MatrixXd Q = qr.householderQ() * MatrixXd::Identity(A.rows(), r);
    return SubspaceZ{Q};
}

Y1Norm y1_norm(const SampledFunction& f, const NormFamily& norms) {
    const auto& g = f.grid();
    Y1Norm out;
    double prev = norms(g[0], f.at_node(0));
    for (size_t i = 1; i < g.size(); ++i) {
        double cur = norms(g[i], f.at_node(i));
        out.value += 0.5 * (prev + cur) * (g[i] - g[i - 1]);
        prev = cur;
    }
    if (f.decay_rate()) {
        double edge = norms(g.back(), f.at_node(g.size() - 1));
        out.tail_bound = edge / *f.decay_rate();
    }
    return out;
}

YinfNorm yinf_norm(const SampledFunction& f, const NormFamily& norms) {
    const auto& g = f.grid();
    YinfNorm out;
    out.value = -1.0;
    auto consider = [&](double t, const VectorXd& v) {
        double n = norms(t, v);
        if (n > out.value) { out.value = n; out.at_time = t; }
    };
    for (size_t i = 0; i < g.size(); ++i) {
        consider(g[i], f.at_node(i));
        if (i + 1 < g.size()) {
            double tm = 0.5 * (g[i] + g[i + 1]);
            consider(tm, 0.5 * (f.at_node(i) + f.at_node(i + 1)));
        }
    }
    return out;
}

InZResult in_Z(const SampledFunction& f, const SubspaceZ& Z, double tol) {
    VectorXd x0 = f.at_node(0);
    VectorXd residual = Z.rank() == 0 ? x0 : (x0 - Z.basis * (Z.basis.transpose() * x0)).eval();
    InZResult r;
    r.distance = residual.norm();
    r.member = r.distance <= tol * (1.0 + x0.norm());
    return r;
}

}  // namespace rhodich
