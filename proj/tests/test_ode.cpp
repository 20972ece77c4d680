#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lqmfg/ode.hpp"

#include <cmath>

using namespace lqmfg;
using Eigen::VectorXd;

namespace {

VectorXd scalar_state(double v) { return VectorXd::Constant(1, v); }

}  // namespace

TEST_CASE("zero field keeps the terminal value")
{
    OdeRhs rhs = [](double, const VectorXd& y, VectorXd& dy) { dy = 0.0 * y; };
    OdeSolution sol = integrate_backward(rhs, 2.0, 0.0, scalar_state(3.5), {});
    REQUIRE(sol.ok());
    MatrixPath p = solution_block_path(sol, 0, 1, 1);
    CHECK(p.eval(0.0)(0, 0) == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(p.eval(1.3)(0, 0) == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("linear decay backward recovers e")
{
    // y' = -y, y(1) = 1  =>  y(t) = e^{1-t}, y(0) = e
    OdeRhs rhs = [](double, const VectorXd& y, VectorXd& dy) { dy = -y; };
    OdeSolution sol = integrate_backward(rhs, 1.0, 0.0, scalar_state(1.0), {});
    REQUIRE(sol.ok());
    MatrixPath p = solution_block_path(sol, 0, 1, 1);
    CHECK(p.eval(0.0)(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
    // between nodes the Hermite interpolant is O(h^4)
    CHECK(p.eval(0.5)(0, 0) == doctest::Approx(std::exp(0.5)).epsilon(1e-7));
}

TEST_CASE("quadratic blow-up backward is bracketed at t = 1")
{
    // y' = -y^2 with y(2) = 1 has y(t) = 1/(t-1): finite escape as t -> 1+
    OdeRhs rhs = [](double, const VectorXd& y, VectorXd& dy) { dy = -y.array().square().matrix(); };
    OdeSolution sol = integrate_backward(rhs, 2.0, 0.0, scalar_state(1.0), {});
    REQUIRE(sol.escaped);
    CHECK(sol.escape.estimate() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.escape.t_hi - sol.escape.t_lo <= 10 * 1e-12 * 2.0 + 1e-15);
    // value before the blow-up region still matches 1/(t-1)
    MatrixPath p = solution_block_path(sol, 0, 1, 1);
    CHECK(p.eval(1.5)(0, 0) == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("escape is loud: norms near the bracket reach the threshold")
{
    OdeRhs rhs = [](double, const VectorXd& y, VectorXd& dy) { dy = -y.array().square().matrix(); };
    OdeOptions opts;
    OdeSolution sol = integrate_backward(rhs, 2.0, 0.0, scalar_state(1.0), opts);
    REQUIRE(sol.escaped);
    CHECK(sol.max_norm >= opts.norm_escape / 2);
}

TEST_CASE("forward exponential growth matches the closed form")
{
    OdeRhs rhs = [](double, const VectorXd& y, VectorXd& dy) { dy = 2.0 * y; };
    OdeSolution sol = integrate(rhs, 0.0, 1.0, scalar_state(1.0), {});
    REQUIRE(sol.ok());
    MatrixPath p = solution_block_path(sol, 0, 1, 1);
    CHECK(p.eval(1.0)(0, 0) == doctest::Approx(std::exp(2.0)).epsilon(1e-9));
}

TEST_CASE("fixed-step mode lands on the requested grid")
{
    OdeRhs rhs = [](double t, const VectorXd& y, VectorXd& dy) { dy = VectorXd::Constant(1, std::cos(t)); (void)y; };
    OdeOptions opts;
    opts.grid = GridPolicy::fixed(40);
    OdeSolution sol = integrate(rhs, 0.0, 2.0, scalar_state(0.0), opts);
    REQUIRE(sol.ok());
    REQUIRE(sol.t.size() == 41);
    CHECK(sol.t[10] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sol.y.back()(0) == doctest::Approx(std::sin(2.0)).epsilon(1e-8));
}

TEST_CASE("dense output is fourth-order accurate between nodes")
{
    OdeRhs rhs = [](double t, const VectorXd&, VectorXd& dy) {
        dy = VectorXd::Constant(1, std::exp(t));
    };
    OdeOptions opts;
    opts.grid = GridPolicy::fixed(20);
    OdeSolution sol = integrate(rhs, 0.0, 1.0, scalar_state(1.0), opts);
    MatrixPath p = solution_block_path(sol, 0, 1, 1);
    double worst = 0;
    for (double t = 0.0; t <= 1.0; t += 0.003)
        worst = std::max(worst, std::abs(p.eval(t)(0, 0) - std::exp(t)));
    CHECK(worst < 1e-7);
}

TEST_CASE("post-step hook is applied to accepted states")
{
    OdeRhs rhs = [](double, const VectorXd& y, VectorXd& dy) { dy = 0 * y; };
    OdeOptions opts;
    opts.post_step = [](double, VectorXd& y) { y[1] = y[0]; };
    VectorXd y0(2);
    y0 << 1.0, 99.0;
    OdeSolution sol = integrate(rhs, 0.0, 1.0, y0, opts);
    REQUIRE(sol.ok());
    CHECK(sol.y.back()[1] == doctest::Approx(1.0));
}
