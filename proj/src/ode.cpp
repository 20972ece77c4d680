#include "lqmfg/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lqmfg {

namespace {

// Dormand-Prince 5(4) tableau. The 5th-order solution propagates; the
// embedded 4th-order solution provides the error estimate (FSAL).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat (5th minus embedded 4th order weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Stepper {
    const OdeRhs& rhs;
    int dim;
    Eigen::VectorXd k1, k2, k3, k4, k5, k6, k7, ytmp, yerr;

    Stepper(const OdeRhs& rhs_, int dim_) : rhs(rhs_), dim(dim_)
    {
        k1.resize(dim), k2.resize(dim), k3.resize(dim), k4.resize(dim), k5.resize(dim);
        k6.resize(dim), k7.resize(dim), ytmp.resize(dim), yerr.resize(dim);
    }

    // One trial step from (t, y) with k1 = f(t, y) already evaluated.
    // Fills ynew, k7 = f(t+h, ynew) and the embedded error estimate.
    void step(double t, const Eigen::VectorXd& y, double h, Eigen::VectorXd& ynew)
    {
        ytmp = y + h * (a21 * k1);
        rhs(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, ynew, k7);
        yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    }

    double error_norm(const Eigen::VectorXd& y, const Eigen::VectorXd& ynew, double rtol,
                      double atol) const
    {
        double acc = 0;
        for (int i = 0; i < dim; ++i) {
            double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            double r = yerr[i] / sc;
            acc += r * r;
        }
        return std::sqrt(acc / dim);
    }
};

// Cubic Hermite value inside one accepted step.
Eigen::VectorXd hermite(double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0, double t1,
                        const Eigen::VectorXd& y1, const Eigen::VectorXd& f1, double t)
{
    const double h = t1 - t0, s = (t - t0) / h, s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + ((s3 - 2 * s2 + s) * h) * f0 + (-2 * s3 + 3 * s2) * y1 +
           ((s3 - s2) * h) * f1;
}

}  // namespace

OdeSolution integrate(const OdeRhs& rhs, double t0, double t1, const Eigen::VectorXd& y0,
                      const OdeOptions& opts)
{
    OdeSolution sol;
    const int dim = (int)y0.size();
    const double span = t1 - t0;
    assert(span > 0);
    const double hmin = opts.hmin_rel * span;
    const double rtol = opts.grid.rtol, atol = opts.grid.atol;
    const bool fixed = opts.grid.is_fixed();

    Stepper st(rhs, dim);
    double t = t0;
    Eigen::VectorXd y = y0;
    rhs(t, y, st.k1);

    sol.t.push_back(t);
    sol.y.push_back(y);
    sol.f.push_back(st.k1);
    sol.max_norm = y.norm();

    if (sol.max_norm >= opts.norm_escape) {
        sol.escaped = true;
        sol.escape = {t, t, sol.max_norm};
        return sol;
    }

    double h = fixed ? span / opts.grid.fixed_steps : std::min(span, 1e-3 * span);
    Eigen::VectorXd ynew(dim), fnew(dim);
    long steps = 0;

    while (t < t1) {
        if (++steps > opts.max_steps) {
            sol.failed = true;
            sol.error = "step budget exhausted";
            return sol;
        }

        double t_target;
        if (fixed) {
            const long idx = (long)sol.t.size();  // index of the node this step produces
            t_target = (idx >= opts.grid.fixed_steps) ? t1
                                                      : t0 + span * (double)idx / opts.grid.fixed_steps;
            h = t_target - t;
        } else {
            h = std::min(h, t1 - t);
            t_target = t + h;
        }

        st.step(t, y, h, ynew);

        if (!fixed) {
            double err = st.error_norm(y, ynew, rtol, atol);
            if (!std::isfinite(err)) err = 1e10;
            const bool accept = err <= 1.0 || h <= hmin;
            double factor = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
            const double hnext = std::clamp(h * factor, hmin, span);
            if (!accept) {
                h = hnext;
                continue;
            }
            if (h <= hmin && err > 1.0) {
                // cannot resolve the vector field at the minimal step
                if (y.norm() >= 0.5 * opts.norm_escape || !ynew.allFinite()) {
                    sol.escaped = true;
                    sol.escape = {t, t + h, sol.max_norm};
                } else {
                    sol.failed = true;
                    sol.error = "stiffness at t ~ " + std::to_string(t) + " (step underflow)";
                    sol.escape = {t, t + h, sol.max_norm};
                }
                return sol;
            }
            h = hnext;
        }

        if (!ynew.allFinite()) {
            // overflow inside the step: the escape lies within (t, t_target]
            sol.escaped = true;
            sol.escape = {t, t_target, sol.max_norm};
            return sol;
        }

        if (opts.post_step) opts.post_step(t_target, ynew);
        rhs(t_target, ynew, fnew);

        const double nrm = ynew.norm();
        if (nrm >= opts.norm_escape) {
            // bisect the norm crossing on the Hermite interpolant of this step
            double lo = t, hi = t_target;
            const double width_target = 10 * hmin;
            while (hi - lo > width_target) {
                const double mid = 0.5 * (lo + hi);
                if (hermite(t, y, st.k1, t_target, ynew, fnew, mid).norm() >= opts.norm_escape)
                    hi = mid;
                else
                    lo = mid;
            }
            sol.max_norm = std::max(sol.max_norm, nrm);
            sol.escaped = true;
            sol.escape = {lo, hi, sol.max_norm};
            sol.t.push_back(t_target);
            sol.y.push_back(ynew);
            sol.f.push_back(fnew);
            return sol;
        }

        t = t_target;
        y = ynew;
        st.k1 = fnew;  // FSAL (recomputed above so post_step adjustments propagate)
        sol.t.push_back(t);
        sol.y.push_back(y);
        sol.f.push_back(st.k1);
        sol.max_norm = std::max(sol.max_norm, nrm);
    }
    return sol;
}

OdeSolution integrate_backward(const OdeRhs& rhs, double T, double t0, const Eigen::VectorXd& yT,
                               const OdeOptions& opts)
{
    assert(T > t0);
    OdeRhs reversed = [&](double tau, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
        rhs(T - tau, y, dydt);
        dydt = -dydt;
    };
    OdeOptions ropts = opts;
    if (opts.post_step)
        ropts.post_step = [&](double tau, Eigen::VectorXd& y) { opts.post_step(T - tau, y); };

    OdeSolution raw = integrate(reversed, 0.0, T - t0, yT, ropts);

    OdeSolution sol;
    sol.failed = raw.failed;
    sol.error = raw.error;
    sol.escaped = raw.escaped;
    sol.max_norm = raw.max_norm;
    if (raw.escaped || raw.failed)
        sol.escape = {T - raw.escape.t_hi, T - raw.escape.t_lo, raw.escape.max_norm};
    const int m = (int)raw.t.size();
    sol.t.resize(m);
    sol.y.resize(m);
    sol.f.resize(m);
    for (int k = 0; k < m; ++k) {
        sol.t[k] = T - raw.t[m - 1 - k];
        sol.y[k] = raw.y[m - 1 - k];
        sol.f[k] = -raw.f[m - 1 - k];
    }
    return sol;
}

MatrixPath solution_block_path(const OdeSolution& sol, int offset, int p, int q)
{
    std::vector<Eigen::MatrixXd> vals, ders;
    vals.reserve(sol.t.size());
    ders.reserve(sol.t.size());
    for (size_t k = 0; k < sol.t.size(); ++k) {
        vals.push_back(unflatten(sol.y[k], p, q, offset));
        ders.push_back(unflatten(sol.f[k], p, q, offset));
    }
    return MatrixPath(sol.t, std::move(vals), std::move(ders));
}

}  // namespace lqmfg
