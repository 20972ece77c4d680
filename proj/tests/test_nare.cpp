#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lqmfg/nare.hpp"
#include "lqmfg/riccati.hpp"
#include "lqmfg/rng.hpp"
#include "test_models.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>

using namespace lqmfg;
using lqmfg::testing::example5;
using lqmfg::testing::example6;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// multiset comparison of spectra up to `tol`
bool spectra_match(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b,
                   double tol)
{
    if (a.size() != b.size()) return false;
    for (const auto& x : a) {
        auto it = std::min_element(b.begin(), b.end(), [&](auto u, auto v) {
            return std::abs(u - x) < std::abs(v - x);
        });
        if (it == b.end() || std::abs(*it - x) > tol) return false;
        b.erase(it);
    }
    return true;
}

}  // namespace

TEST_CASE("scalar stationary weight in closed form")
{
    GameModel m = GameModel::scalar(0.5, 1, 0, 0, 2.0, 1, 0, 0, 0, 0, 0, 1.0);
    AREResult r = solve_are(m);
    CHECK(r.lambda1_inf(0, 0) == doctest::Approx(0.5 + std::sqrt(0.25 + 2.0)).epsilon(1e-10));
    CHECK(r.residual <= 1e-10);
    CHECK(r.closed_loop_abscissa < 0);

    AREResult r2 = solve_are(GameModel::scalar(0.2, 1, 0, 0, 1.0, 1, 0, 0, 0, 0, 0, 1.0));
    CHECK(r2.lambda1_inf(0, 0) == doctest::Approx(0.2 + std::sqrt(1.04)).epsilon(1e-10));
}

TEST_CASE("zero weight with a stable drift gives the zero solution")
{
    GameModel m = GameModel::scalar(-0.8, 1, 0, 0, 0.0, 1, 0, 0, 0, 0, 0, 1.0);
    AREResult r = solve_are(m);
    CHECK(std::abs(r.lambda1_inf(0, 0)) <= 1e-12);
    CHECK(r.closed_loop_abscissa == doctest::Approx(-0.8));
}

TEST_CASE("stationary weight agrees with the long-horizon transient")
{
    AREResult r = solve_are(example5());
    CHECK(r.residual <= 1e-10);
    CHECK(r.transient_gap <= 1e-6);
    // PSD check
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(r.lambda1_inf);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("steady-state system matrix spectrum on the benchmark pair")
{
    GameModel m5 = example5();
    AREResult are5 = solve_are(m5);
    SpectralSplit s5 = spectral_split(build_A_infinity(m5, are5));
    CHECK(s5.n_stable == 2);
    CHECK(s5.n_unstable == 2);
    CHECK(s5.strong_splitting);
    std::vector<std::complex<double>> want5 = {{-1.022350, 0.730733},
                                               {-1.022350, -0.730733},
                                               {2.022350, 0.707903},
                                               {2.022350, -0.707903}};
    CHECK(spectra_match(s5.eigenvalues, want5, 1e-4));
    CHECK(s5.invariance_residual <= 1e-9);

    GameModel m6 = example6();
    SpectralSplit s6 = spectral_split(build_A_infinity(m6, solve_are(m6)));
    CHECK(s6.n_stable == 4);
    CHECK(s6.n_unstable == 0);
    std::vector<std::complex<double>> want6 = {{-1.090328, 0.762501},
                                               {-1.090328, -0.762501},
                                               {-0.109672, 0.692413},
                                               {-0.109672, -0.692413}};
    CHECK(spectra_match(s6.eigenvalues, want6, 1e-4));
}

TEST_CASE("block-triangular steady-state matrix when the couplings vanish")
{
    // G = 0, Gamma = 0: the (2,1) block is zero, so the spectrum is the
    // union of the two diagonal blocks, mirrored about the imaginary axis
    GameModel m = GameModel::scalar(0.3, 1, 0, 0, 1.0, 1, 0, 0, 0, 0, 0, 1.0);
    AREResult are = solve_are(m);
    MatrixXd Ainf = build_A_infinity(m, are);
    CHECK(std::abs(Ainf(1, 0)) <= 1e-12);
    SpectralSplit s = spectral_split(Ainf);
    REQUIRE(s.eigenvalues.size() == 2);
    CHECK(s.eigenvalues[0].real() == doctest::Approx(-s.eigenvalues[1].real()).epsilon(1e-10));
}

TEST_CASE("diagonal split example")
{
    MatrixXd A = MatrixXd::Zero(4, 4);
    A.diagonal() << -1, -2, 3, 4;
    SpectralSplit s = spectral_split(A);
    CHECK(s.n_stable == 2);
    CHECK(s.n_unstable == 2);
    // stable subspace = span{e1, e2}: top block of U has full singular values
    CHECK(s.sigma_min_U1 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stabilizing solution on the benchmark instance")
{
    GameModel m = example5();
    NareResult r = stabilizing_solution(m);
    REQUIRE(r.verdict == NareVerdict::stabilizing_solution);
    MatrixXd want(2, 2);
    want << 16.238985, 4.099679, 4.132523, 1.570208;
    CHECK((*r.lambda2_inf - want).cwiseAbs().maxCoeff() <= 1e-4);
    CHECK(r.residual <= 1e-8);
    CHECK(r.hurwitz_AG);
    CHECK(r.hurwitz_AM);

    // block triangularization by K = [[I,0],[L2,I]]
    const int n = 2;
    MatrixXd K = MatrixXd::Identity(2 * n, 2 * n);
    K.bottomLeftCorner(n, n) = *r.lambda2_inf;
    MatrixXd KAK = K.inverse() * r.split.A_inf * K;
    MatrixXd want_block(2 * n, 2 * n);
    want_block << r.A_G, -control_weight(m), MatrixXd::Zero(n, n), -r.A_M.transpose();
    CHECK((KAK - want_block).norm() <= 1e-8);

    // spectrum consistency: eig(A_inf) = eig(A_G) U eig(-A_M')
    Eigen::EigenSolver<MatrixXd> eg(r.A_G), em(-r.A_M.transpose());
    std::vector<std::complex<double>> uni;
    for (int i = 0; i < n; ++i) uni.push_back(eg.eigenvalues()[i]);
    for (int i = 0; i < n; ++i) uni.push_back(em.eigenvalues()[i]);
    CHECK(spectra_match(r.split.eigenvalues, uni, 1e-7));
}

TEST_CASE("no stabilizing solution when the split degenerates")
{
    NareResult r = stabilizing_solution(example6());
    CHECK(r.verdict == NareVerdict::no_splitting);
    CHECK_FALSE(r.lambda2_inf.has_value());
}

TEST_CASE("zero couplings admit the zero stabilizing solution")
{
    GameModel m = GameModel::scalar(0.3, 1, 0, 0, 1.0, 1, 0, 0, 0, 0, 0, 1.0);
    NareResult r = stabilizing_solution(m);
    REQUIRE(r.verdict == NareVerdict::stabilizing_solution);
    CHECK(r.lambda2_inf->norm() <= 1e-10);
    CHECK((r.A_G - r.A_M).norm() <= 1e-10);
}

TEST_CASE("graph representation is basis independent")
{
    GameModel m = example5();
    AREResult are = solve_are(m);
    SpectralSplit s = spectral_split(build_A_infinity(m, are));
    NareResult r1 = stabilizing_solution(m, are, s);
    REQUIRE(r1.verdict == NareVerdict::stabilizing_solution);

    CounterRng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        MatrixXd W(2, 2);
        do {
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) W(i, j) = rng.normal(trial, i, j, 7);
        } while (std::abs(W.determinant()) < 0.1);
        SpectralSplit s2 = s;
        s2.U = s.U * W;
        NareResult r2 = stabilizing_solution(m, are, s2);
        REQUIRE(r2.verdict == NareVerdict::stabilizing_solution);
        CHECK((*r2.lambda2_inf - *r1.lambda2_inf).norm() <= 1e-9);
    }
}

TEST_CASE("stationary offset solves its linear system")
{
    GameModel m = example5();
    NareResult r = stabilizing_solution(m);
    LimitingOffset o = limiting_offset(m, r);
    CHECK(o.residual <= 1e-10);

    // dynamic route: with frozen weights the offset flow, integrated backward
    // far beyond the horizon, settles at the constant (A_M Hurwitz)
    const int n = m.n;
    OdeRhs rhs = [&](double, const VectorXd& y, VectorXd& dy) {
        dy = -r.A_M.transpose() * y + m.Q * m.eta;
    };
    OdeSolution sol = integrate_backward(rhs, 50.0, 0.0, VectorXd::Zero(n), OdeOptions{});
    REQUIRE(sol.ok());
    CHECK((sol.y.front() - o.chi1_inf).norm() <= 1e-6);
}

TEST_CASE("offset requires a Hurwitz closed loop")
{
    GameModel m = example6();
    NareResult r = stabilizing_solution(m);
    CHECK_THROWS(limiting_offset(m, r));
}

TEST_CASE("zero target gives zero offset")
{
    GameModel m = example5();
    m.eta.setZero();
    NareResult r = stabilizing_solution(m);
    LimitingOffset o = limiting_offset(m, r);
    CHECK(o.chi1_inf.norm() <= 1e-12);
}

TEST_CASE("stationary point of the reversed coupling flow")
{
    GameModel m = example5();
    NareResult r = stabilizing_solution(m);
    StabilityProbe p0 = local_stability_probe(m, r, 0.0, 5.0);
    REQUIRE_FALSE(p0.diverged);
    CHECK(*std::max_element(p0.distance.begin(), p0.distance.end()) <= 1e-7);
}

TEST_CASE("perturbations decay at the linearized rate")
{
    GameModel m = example5();
    NareResult r = stabilizing_solution(m);
    const double delta = 1e-3 * r.lambda2_inf->norm();
    StabilityProbe p = local_stability_probe(m, r, delta, 10.0, 17);
    REQUIRE_FALSE(p.diverged);

    // the distance bottoms out at the accuracy of the equilibrium itself;
    // the rate bound is asserted on the range above that floor
    const double floor = 100 * std::max(p.distance.back(), 1e-12);
    const double rate = r.abscissa_AG + r.abscissa_AM + 0.1;
    for (size_t k = 0; k < p.t.size(); ++k) {
        const double bound = p.distance.front() * std::exp(rate * p.t[k]);
        if (bound > floor) CHECK(p.distance[k] <= bound);
    }
    CHECK(p.distance.back() <= 1e-6);
    CHECK(p.distance.back() < p.distance.front());
}

TEST_CASE("linearized flow matches the matrix-exponential form")
{
    GameModel m = example5();
    NareResult r = stabilizing_solution(m);
    const int n = m.n;
    CounterRng rng(11);
    MatrixXd Z0(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Z0(i, j) = rng.normal(9, i, j, 0);

    OdeRhs rhs = [&](double, const VectorXd& y, VectorXd& dy) {
        MatrixXd Z = unflatten(y, n, n);
        dy = flatten((r.A_M.transpose() * Z + Z * r.A_G).eval());
    };
    OdeOptions opts;
    opts.grid.rtol = 1e-11;
    opts.grid.atol = 1e-14;
    OdeSolution sol = integrate(rhs, 0.0, 2.0, flatten(Z0), opts);
    REQUIRE(sol.ok());
    const MatrixXd Z_num = unflatten(sol.y.back(), n, n);
    const MatrixXd Z_exact = (r.A_M.transpose() * 2.0).exp() * Z0 * (r.A_G * 2.0).exp();
    CHECK((Z_num - Z_exact).norm() <= 1e-9);
}

TEST_CASE("finite-horizon coupling weight drifts toward the stationary one")
{
    GameModel base = example5();
    NareResult r = stabilizing_solution(base);
    REQUIRE(r.verdict == NareVerdict::stabilizing_solution);

    // distances reach the integrator noise floor (~1e-9) before T = 10 on
    // this instance, so the decreasing-distance window is short
    double prev = std::numeric_limits<double>::infinity();
    for (double T : {2.0, 4.0, 6.0}) {
        GameModel m = base.with_horizon(T);
        m.Qf = Eigen::MatrixXd::Zero(2, 2);
        MatrixPath l1 = solve_lambda1(m);
        PathOrEscape l2 = solve_lambda2(m, l1);
        REQUIRE(l2.ok());
        const double dist = (l2.path->eval(0.0) - *r.lambda2_inf).norm();
        CHECK(dist < prev);
        prev = dist;
    }
    CHECK(prev <= 1e-6);
    // beyond the floor the distance stays pinned there
    GameModel m80 = base.with_horizon(80.0);
    m80.Qf = Eigen::MatrixXd::Zero(2, 2);
    MatrixPath l1 = solve_lambda1(m80);
    PathOrEscape l2 = solve_lambda2(m80, l1);
    REQUIRE(l2.ok());
    CHECK((l2.path->eval(0.0) - *r.lambda2_inf).norm() <= 1e-6);
}
