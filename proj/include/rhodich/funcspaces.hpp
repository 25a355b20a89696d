#ifndef RHODICH_FUNCSPACES_HPP
#define RHODICH_FUNCSPACES_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "rhodich/family.hpp"

namespace rhodich {

// Grid-sampled function [0, T_max] -> R^d with piecewise-linear interpolation.
// Values are immutable after construction.
class SampledFunction {
  public:
    SampledFunction(std::vector<double> grid, MatrixXd values /* d x N */);

    const std::vector<double>& grid() const { return grid_; }
    const MatrixXd& values() const { return values_; }
    int dim() const { return static_cast<int>(values_.rows()); }
    double t_max() const { return grid_.back(); }

    VectorXd eval(double t) const;
    VectorXd at_node(size_t i) const { return values_.col(static_cast<Eigen::Index>(i)); }

    // Constant extension beyond T_max must be requested explicitly.
    SampledFunction& allow_constant_extension() { const_extend_ = true; return *this; }
    bool extends() const { return const_extend_; }

    // Optional decay annotation ||f(t)||_t <= coef * e^{-rate (t - T_max)} for
    // t >= T_max, used for truncation-tail bounds of Y1 quadrature.
    SampledFunction& annotate_decay(double rate) { decay_rate_ = rate; return *this; }
    std::optional<double> decay_rate() const { return decay_rate_; }

    // Sample a closed-form function on a uniform grid of n nodes over [0, T].
    static SampledFunction from_function(const std::function<VectorXd(double)>& f,
                                         double T, size_t n);
    // chi_[a,b] * v with jump nodes inserted at a and b (right limits offset
    // by 1e-9 so the trapezoid rule sees the jump).
    static SampledFunction indicator(double a, double b, const VectorXd& v,
                                     double T, size_t n);

  private:
    std::vector<double> grid_;
    MatrixXd values_;
    bool const_extend_ = false;
    std::optional<double> decay_rate_;
};

struct SubspaceZ {
    MatrixXd basis;  // d x k, orthonormal columns; k = 0 is the trivial subspace

    static SubspaceZ trivial(int dim) { return SubspaceZ{MatrixXd::Zero(dim, 0)}; }
    static SubspaceZ span(const std::vector<VectorXd>& vecs);
    int dim() const { return static_cast<int>(basis.rows()); }
    int rank() const { return static_cast<int>(basis.cols()); }
};

struct Y1Norm {
    double value = 0.0;
    double tail_bound = 0.0;  // 0 when no decay annotation
};

struct YinfNorm {
    double value = 0.0;
    double at_time = 0.0;  // node or midpoint attaining the max
};

struct InZResult {
    bool member = false;
    double distance = 0.0;
};

// Composite trapezoid of t -> ||f(t)||_t over the sample grid.
Y1Norm y1_norm(const SampledFunction& f, const NormFamily& norms);

// Max of ||f(t)||_t over grid nodes and midpoints. Serves both Yinf and the
// essential-sup variant (grid sup = numerical ess sup).
YinfNorm yinf_norm(const SampledFunction& f, const NormFamily& norms);

// distance = ||(Id - Pi_Z) f(0)||; member iff distance <= tol * (1 + ||f(0)||).
InZResult in_Z(const SampledFunction& f, const SubspaceZ& Z, double tol);

}  // namespace rhodich

#endif
