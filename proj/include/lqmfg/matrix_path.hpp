#pragma once

#include <Eigen/Core>

#include <cassert>
#include <string>
#include <vector>

namespace lqmfg {

/// Step-size policy for the ODE engine. `fixed_steps > 0` selects a uniform
/// grid with that many steps; otherwise the step is adaptive under
/// (rtol, atol) error control.
struct GridPolicy {
    double rtol = 1e-9;
    double atol = 1e-12;
    int fixed_steps = 0;

    static GridPolicy adaptive(double rtol = 1e-9, double atol = 1e-12)
    {
        return GridPolicy{rtol, atol, 0};
    }
    static GridPolicy fixed(int steps, double rtol = 1e-9, double atol = 1e-12)
    {
        return GridPolicy{rtol, atol, steps};
    }
    bool is_fixed() const { return fixed_steps > 0; }
};

/// A matrix-valued function of time sampled on a strictly increasing grid,
/// with cubic Hermite interpolation between nodes. Nodes carry both the value
/// and the time derivative so the interpolant is C^1 and fourth-order
/// accurate on integrator output.
class MatrixPath {
  public:
    MatrixPath() = default;
    MatrixPath(std::vector<double> nodes, std::vector<Eigen::MatrixXd> values,
               std::vector<Eigen::MatrixXd> derivatives);

    int rows() const { return values_.empty() ? 0 : (int)values_[0].rows(); }
    int cols() const { return values_.empty() ? 0 : (int)values_[0].cols(); }
    int size() const { return (int)nodes_.size(); }
    bool empty() const { return nodes_.empty(); }

    double t0() const { return nodes_.front(); }
    double t1() const { return nodes_.back(); }
    const std::vector<double>& nodes() const { return nodes_; }
    const Eigen::MatrixXd& value(int k) const { return values_[k]; }
    const Eigen::MatrixXd& derivative(int k) const { return derivs_[k]; }

    /// Dense evaluation at t in [t0, t1] (clamped within a small tolerance).
    Eigen::MatrixXd eval(double t) const;
    Eigen::MatrixXd operator()(double t) const { return eval(t); }

    /// Largest Frobenius norm over the stored nodes.
    double max_norm() const;

    /// A path that is constant in time on [t0, t1].
    static MatrixPath constant(double t0, double t1, const Eigen::MatrixXd& v);

  private:
    int locate(double t) const;

    std::vector<double> nodes_;
    std::vector<Eigen::MatrixXd> values_;
    std::vector<Eigen::MatrixXd> derivs_;
};

}  // namespace lqmfg
