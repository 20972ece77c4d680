#include "lqmfg/riccati.hpp"

#include <cmath>
#include <stdexcept>

namespace lqmfg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

OdeOptions make_opts(const GridPolicy& grid)
{
    OdeOptions o;
    o.grid = grid;
    return o;
}

MatrixPath to_path(const OdeSolution& sol, int p, int q)
{
    return solution_block_path(sol, 0, p, q);
}

}  // namespace

MatrixPath solve_lambda1(const GameModel& m, const GridPolicy& grid)
{
    const int n = m.n;
    const MatrixXd M = control_weight(m);
    OdeRhs rhs = [&, M](double, const VectorXd& y, VectorXd& dy) {
        MatrixXd L1 = unflatten(y, m.n, m.n);
        MatrixXd d = L1 * M * L1 - (L1 * m.A + m.A.transpose() * L1) - m.Q;
        dy = flatten(d);
    };
    OdeOptions opts = make_opts(grid);
    opts.post_step = [n](double, VectorXd& y) {
        MatrixXd L = unflatten(y, n, n);
        y = flatten(((L + L.transpose()) * 0.5).eval());
    };
    OdeSolution sol = integrate_backward(rhs, m.T, 0.0, flatten(m.Qf), opts);
    if (!sol.ok()) throw std::runtime_error("lambda1 integration failed: " + sol.error);
    return to_path(sol, n, n);
}

PathOrEscape solve_lambda2(const GameModel& m, const MatrixPath& lambda1, const GridPolicy& grid)
{
    const int n = m.n;
    const MatrixXd M = control_weight(m);
    const MatrixXd At = m.A.transpose();
    const MatrixXd ApG = m.A + m.G;
    const MatrixXd QGam = m.Q * m.Gamma;
    OdeRhs rhs = [&, M, At, ApG, QGam](double t, const VectorXd& y, VectorXd& dy) {
        MatrixXd L1 = lambda1.eval(t);
        MatrixXd L2 = unflatten(y, m.n, m.n);
        MatrixXd d = L1 * M * L2 + L2 * M * L1 + L2 * M * L2 -
                     (L1 * m.G + L2 * ApG + At * L2) + QGam;
        dy = flatten(d);
    };
    MatrixXd terminal = -(m.Qf * m.Gammaf);
    OdeSolution sol = integrate_backward(rhs, m.T, 0.0, flatten(terminal), make_opts(grid));
    PathOrEscape out;
    if (sol.escaped) {
        out.escape = sol.escape;
        return out;
    }
    if (sol.failed) throw std::runtime_error("lambda2 integration failed: " + sol.error);
    out.path = to_path(sol, n, n);
    return out;
}

MatrixPath solve_lambda3(const GameModel& m, const MatrixPath& lambda1, const MatrixPath& lambda2,
                         const GridPolicy& grid)
{
    const int n = m.n;
    const MatrixXd M = control_weight(m);
    const MatrixXd ApG = m.A + m.G;
    const MatrixXd GtQG = m.Gamma.transpose() * m.Q * m.Gamma;
    OdeRhs rhs = [&, M, ApG, GtQG](double t, const VectorXd& y, VectorXd& dy) {
        MatrixXd L1 = lambda1.eval(t);
        MatrixXd L2 = lambda2.eval(t);
        MatrixXd L3 = unflatten(y, m.n, m.n);
        MatrixXd d = L2.transpose() * M * L2 + L3 * M * L1 + L1 * M * L3 + L3 * M * L2 +
                     L2.transpose() * M * L3 -
                     (L2.transpose() * m.G + m.G.transpose() * L2 + L3 * ApG +
                      ApG.transpose() * L3) -
                     GtQG;
        dy = flatten(d);
    };
    MatrixXd terminal = m.Gammaf.transpose() * m.Qf * m.Gammaf;
    OdeSolution sol = integrate_backward(rhs, m.T, 0.0, flatten(terminal), make_opts(grid));
    if (!sol.ok()) throw std::runtime_error("lambda3 integration failed: " + sol.error);
    return to_path(sol, n, n);
}

MatrixPath solve_chi1(const GameModel& m, const MatrixPath& lambda1, const MatrixPath& lambda2,
                      const GridPolicy& grid)
{
    const int n = m.n;
    const MatrixXd M = control_weight(m);
    const VectorXd Qeta = m.Q * m.eta;
    OdeRhs rhs = [&, M, Qeta](double t, const VectorXd& y, VectorXd& dy) {
        dy = (lambda1.eval(t) * M + lambda2.eval(t) * M - m.A.transpose()) * y + Qeta;
    };
    VectorXd terminal = -(m.Qf * m.etaf);
    OdeSolution sol = integrate_backward(rhs, m.T, 0.0, terminal, make_opts(grid));
    if (!sol.ok()) throw std::runtime_error("chi1 integration failed: " + sol.error);
    return to_path(sol, n, 1);
}

MatrixPath solve_chi2(const GameModel& m, const MatrixPath& lambda1, const MatrixPath& lambda2,
                      const MatrixPath& lambda3, const MatrixPath& chi1, const GridPolicy& grid)
{
    const int n = m.n;
    const MatrixXd M = control_weight(m);
    const VectorXd GtQeta = m.Gamma.transpose() * m.Q * m.eta;
    OdeRhs rhs = [&, M, GtQeta](double t, const VectorXd& y, VectorXd& dy) {
        MatrixXd L1 = lambda1.eval(t);
        MatrixXd L2 = lambda2.eval(t);
        MatrixXd L3 = lambda3.eval(t);
        VectorXd c1 = chi1.eval(t);
        dy = ((L2.transpose() + L3) * M - m.G.transpose()) * c1 +
             ((L1 + L2.transpose()) * M - (m.A.transpose() + m.G.transpose())) * y - GtQeta;
    };
    VectorXd terminal = m.Gammaf.transpose() * m.Qf * m.etaf;
    OdeSolution sol = integrate_backward(rhs, m.T, 0.0, terminal, make_opts(grid));
    if (!sol.ok()) throw std::runtime_error("chi2 integration failed: " + sol.error);
    return to_path(sol, n, 1);
}

MatrixPath solve_mean_field(const GameModel& m, const MatrixPath& lambda1,
                            const MatrixPath& lambda2, const MatrixPath& chi1,
                            const Eigen::VectorXd& x0, const GridPolicy& grid)
{
    const int n = m.n;
    const MatrixXd M = control_weight(m);
    OdeRhs rhs = [&, M](double t, const VectorXd& y, VectorXd& dy) {
        dy = (m.A - M * (lambda1.eval(t) + lambda2.eval(t)) + m.G) * y - M * chi1.eval(t);
    };
    OdeSolution sol = integrate(rhs, 0.0, m.T, x0, make_opts(grid));
    if (!sol.ok()) throw std::runtime_error("mean field integration failed: " + sol.error);
    return to_path(sol, n, 1);
}

LimitOrEscape solve_limit(const GameModel& m, const Eigen::VectorXd& x0, const GridPolicy& grid)
{
    LimitOrEscape out;
    MatrixPath l1 = solve_lambda1(m, grid);
    PathOrEscape l2 = solve_lambda2(m, l1, grid);
    if (!l2.ok()) {
        out.escape = l2.escape;
        return out;
    }
    LimitSolution lim;
    lim.lambda1 = std::move(l1);
    lim.lambda2 = std::move(*l2.path);
    lim.lambda3 = solve_lambda3(m, lim.lambda1, lim.lambda2, grid);
    lim.chi1 = solve_chi1(m, lim.lambda1, lim.lambda2, grid);
    lim.chi2 = solve_chi2(m, lim.lambda1, lim.lambda2, lim.lambda3, lim.chi1, grid);
    lim.xbar = solve_mean_field(m, lim.lambda1, lim.lambda2, lim.chi1, x0, grid);
    lim.x0 = x0;
    out.limit = std::move(lim);
    return out;
}

SolvabilityVerdict check_asymptotic_solvability(const GameModel& m, const GridPolicy& grid)
{
    SolvabilityVerdict v;
    v.grid_used = grid;
    MatrixPath l1 = solve_lambda1(m, grid);
    PathOrEscape l2 = solve_lambda2(m, l1, grid);
    if (l2.ok()) {
        v.solvable = true;
        v.max_norm_reached = l2.path->max_norm();
    } else {
        v.solvable = false;
        v.escape = l2.escape;
        v.max_norm_reached = l2.escape->max_norm;
    }
    return v;
}

ScalarClosedForm lambda2_scalar_closed_form(const ScalarHatParams& p, double T, double t)
{
    ScalarClosedForm out;
    const double dt = T - t;  // >= 0
    if (p.Delta_hat > tol::case_dispatch) {
        // two distinct real characteristic roots
        const double alpha = *p.alpha, l1 = *p.lambda_hat_1, l2 = *p.lambda_hat_2;
        const double ep = std::exp(alpha * dt), en = std::exp(-alpha * dt);
        auto denom = [&](double d) { return l2 * std::exp(-alpha * d) - l1 * std::exp(alpha * d); };
        // check for a sign change of the denominator on (t, T]
        if (l2 * l1 > 0) {
            const double horizon = std::log(l2 / l1) / (2 * alpha);
            if (horizon > 0 && horizon <= dt) {
                out.escaped = true;
                return out;
            }
        }
        out.value = p.Q_hat * (ep - en) / denom(dt);
    } else if (p.Delta_hat >= -tol::case_dispatch) {
        // double root a_hat
        const double a = p.a_hat;
        const double den = a * (t - T) - 1.0;
        if (a < 0 && -1.0 / a <= dt) {
            out.escaped = true;
            return out;
        }
        out.value = a * a * dt / den;
    } else {
        // complex pair: oscillatory form with phase theta
        const double beta = std::sqrt(-p.Delta_hat);
        const double theta = std::atan2(beta, p.a_hat);
        const double horizon = (M_PI - theta) / beta;  // first zero of sin(beta(T-t)+theta)
        if (horizon <= dt) {
            out.escaped = true;
            return out;
        }
        out.value = std::sqrt(p.Q_hat) * std::sin(beta * (t - T)) / std::sin(beta * dt + theta);
    }
    return out;
}

std::optional<double> scalar_escape_horizon(const ScalarHatParams& p)
{
    if (p.Q_hat <= tol::case_dispatch) return std::nullopt;  // global solution
    if (p.Delta_hat > tol::case_dispatch) {
        if (p.a_hat > 0) return std::nullopt;  // both roots positive: global
        return std::log(*p.lambda_hat_2 / *p.lambda_hat_1) / (2 * *p.alpha);
    }
    if (p.Delta_hat >= -tol::case_dispatch) {
        if (p.a_hat > 0) return std::nullopt;
        return -1.0 / p.a_hat;
    }
    const double beta = std::sqrt(-p.Delta_hat);
    const double theta = std::atan2(beta, p.a_hat);
    return (M_PI - theta) / beta;
}

std::optional<double> escape_time_scalar(const ScalarHatParams& p, double T)
{
    auto horizon = scalar_escape_horizon(p);
    if (!horizon || *horizon > T) return std::nullopt;
    return T - *horizon;
}

}  // namespace lqmfg
