#pragma once

#include "lqmfg/matrix_path.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lqmfg {

/// Right-hand side f(t, y) of a first-order system in flattened form.
using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

/// Optional hook applied to the state after every accepted step
/// (e.g. re-symmetrization of a flattened symmetric matrix).
using PostStep = std::function<void(double t, Eigen::VectorXd& y)>;

/// Bracket around a finite escape time detected during integration.
struct EscapeReport {
    double t_lo = 0;
    double t_hi = 0;
    double max_norm = 0;
    double estimate() const { return 0.5 * (t_lo + t_hi); }
};

/// Result of one integration run: the accepted nodes with values and
/// derivatives, plus escape/failure diagnostics. Node times are increasing
/// for forward runs and reported increasing for backward runs as well.
struct OdeSolution {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> y;
    std::vector<Eigen::VectorXd> f;
    bool escaped = false;
    EscapeReport escape;
    bool failed = false;
    std::string error;
    double max_norm = 0;

    bool ok() const { return !escaped && !failed; }
};

struct OdeOptions {
    GridPolicy grid;
    double norm_escape = 1e9;
    double hmin_rel = 1e-12;  // h_min = hmin_rel * |t1 - t0|
    long max_steps = 20'000'000;
    PostStep post_step;
};

/// Integrates y' = f(t, y) from (t0, y0) to t1 (t1 > t0) with the
/// Dormand-Prince 5(4) embedded pair. Local error per step is controlled to
/// atol + rtol*|y| componentwise; a fixed-step policy disables adaptivity.
/// Escape is declared when |y| reaches norm_escape; the crossing is then
/// bisected on the dense interpolant so the reported bracket has width
/// <= 10*h_min.
OdeSolution integrate(const OdeRhs& rhs, double t0, double t1, const Eigen::VectorXd& y0,
                      const OdeOptions& opts);

/// Integrates a terminal-value problem y' = f(t, y), y(T) = yT down to t0 by
/// the substitution tau = T - t, and reports the result on the original time
/// axis with increasing node times.
OdeSolution integrate_backward(const OdeRhs& rhs, double T, double t0, const Eigen::VectorXd& yT,
                               const OdeOptions& opts);

/// Views a flat-state solution as a p x q matrix path (column-major blocks
/// starting at `offset` within the state vector).
MatrixPath solution_block_path(const OdeSolution& sol, int offset, int p, int q);

inline Eigen::VectorXd flatten(const Eigen::MatrixXd& m)
{
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

inline Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int p, int q, int offset = 0)
{
    return Eigen::Map<const Eigen::MatrixXd>(v.data() + offset, p, q);
}

}  // namespace lqmfg
