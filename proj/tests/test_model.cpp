#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lqmfg/model.hpp"
#include "lqmfg/rng.hpp"

#include <Eigen/Dense>

using namespace lqmfg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

GameModel example2(double T = 10.0, double Qf = -1.0)
{
    // A=0.2, B=G=Q=R=1, Gamma=1.2, Gammaf=0; Qf defaults to the stationary
    // weight A + sqrt(A^2+Q)
    const double A = 0.2, Q = 1.0;
    const double qf = Qf < 0 ? A + std::sqrt(A * A + Q) : Qf;
    return GameModel::scalar(A, 1.0, 1.0, 0.5, Q, 1.0, 1.2, 0.0, qf, 0.0, 0.0, T);
}

GameModel example4(double T = 35.0)
{
    // A=-1/4, G=4/5, Q=1/16, Gamma=4/3; Qf = stationary weight, Gammaf=0
    const double A = -0.25, Q = 1.0 / 16.0;
    const double qf = A + std::sqrt(A * A + Q);
    return GameModel::scalar(A, 1.0, 0.8, 0.5, Q, 1.0, 4.0 / 3.0, 1.0, qf, 0.0, 1.0, T);
}

}  // namespace

TEST_CASE("zero Q with identity R validates cleanly")
{
    GameModel m = GameModel::make(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                                  MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                                  MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                                  MatrixXd::Zero(2, 2), VectorXd::Zero(2), MatrixXd::Zero(2, 2),
                                  MatrixXd::Zero(2, 2), VectorXd::Zero(2), 1.0);
    CHECK(validate(m).empty());
}

TEST_CASE("negative R eigenvalue is reported")
{
    MatrixXd R(2, 2);
    R << 1.0, 0.0, 0.0, -0.1;
    GameModel m = GameModel::make(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                                  MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                                  MatrixXd::Zero(2, 2), R, MatrixXd::Zero(2, 2), VectorXd::Zero(2),
                                  MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2), VectorXd::Zero(2),
                                  1.0);
    auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].what == "R not positive definite");
    CHECK(v[0].value == doctest::Approx(-0.1));
    CHECK_FALSE(is_valid(v));
}

TEST_CASE("the benchmark scalar instance is admissible")
{
    CHECK(is_valid(validate(example2())));
    CHECK(is_valid(validate(example4())));
}

TEST_CASE("dimension mismatches are caught")
{
    GameModel m = GameModel::make(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                                  MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                                  MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                                  MatrixXd::Zero(2, 2), VectorXd::Zero(3), MatrixXd::Zero(2, 2),
                                  MatrixXd::Zero(2, 2), VectorXd::Zero(2), 1.0);
    CHECK_FALSE(is_valid(validate(m)));
}

TEST_CASE("control weight on scalars and the tall-B case")
{
    CHECK(control_weight(GameModel::scalar(0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1))(0, 0) ==
          doctest::Approx(1.0));
    CHECK(control_weight(GameModel::scalar(0, 2, 0, 0, 0, 4, 0, 0, 0, 0, 0, 1))(0, 0) ==
          doctest::Approx(1.0));

    // B = [0; 1], R = 1  =>  M = [[0,0],[0,1]]
    MatrixXd B(2, 1);
    B << 0, 1;
    GameModel m = GameModel::make(MatrixXd::Zero(2, 2), B, MatrixXd::Zero(2, 2),
                                  MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2),
                                  MatrixXd::Identity(1, 1), MatrixXd::Zero(2, 2), VectorXd::Zero(2),
                                  MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2), VectorXd::Zero(2),
                                  1.0);
    MatrixXd M = control_weight(m);
    CHECK(M(0, 0) == doctest::Approx(0.0));
    CHECK(M(0, 1) == doctest::Approx(0.0));
    CHECK(M(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("control weight is invariant under orthogonal input transforms")
{
    CounterRng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2, n1 = 2;
        MatrixXd B(n, n1), R0(n1, n1);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n1; ++j) B(i, j) = rng.normal(trial, 0, i, j);
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n1; ++j) R0(i, j) = rng.normal(trial, 1, i, j);
        MatrixXd R = R0 * R0.transpose() + MatrixXd::Identity(n1, n1);

        // random rotation via QR of a random matrix
        MatrixXd Z(n1, n1);
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n1; ++j) Z(i, j) = rng.normal(trial, 2, i, j);
        MatrixXd U = Eigen::HouseholderQR<MatrixXd>(Z).householderQ();

        auto mk = [&](const MatrixXd& Bx, const MatrixXd& Rx) {
            return GameModel::make(MatrixXd::Zero(n, n), Bx, MatrixXd::Zero(n, n),
                                   MatrixXd::Identity(n, n), MatrixXd::Zero(n, n), Rx,
                                   MatrixXd::Zero(n, n), VectorXd::Zero(n), MatrixXd::Zero(n, n),
                                   MatrixXd::Zero(n, n), VectorXd::Zero(n), 1.0);
        };
        MatrixXd M1 = control_weight(mk(B, R));
        MatrixXd M2 = control_weight(mk(B * U, U.transpose() * R * U));
        CHECK((M1 - M2).norm() <= 1e-12 * std::max(1.0, M1.norm()));
    }
}

TEST_CASE("scalar hat parameters reproduce the benchmark values")
{
    ScalarHatParams p = scalar_hat_params(example4());
    CHECK(p.a_hat == doctest::Approx(-0.046447).epsilon(1e-4));
    CHECK(p.Q_hat == doctest::Approx(4.906209e-4).epsilon(1e-4));
    CHECK(p.Delta_hat == doctest::Approx(0.001667).epsilon(1e-3));
    REQUIRE(p.c1);
    CHECK(*p.c1 == doctest::Approx(0.005622).epsilon(1e-4));
    CHECK(*p.c2 == doctest::Approx(0.087271).epsilon(1e-4));
}

TEST_CASE("hat parameters by direct substitution")
{
    // A=0, G=0, Q=1, Gamma=0: a_hat = 1, Q_hat = 0, Delta = 1
    ScalarHatParams p =
        scalar_hat_params(GameModel::scalar(0, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 1.0));
    CHECK(p.a_hat == doctest::Approx(1.0));
    CHECK(p.Q_hat == doctest::Approx(0.0));
    CHECK(p.Delta_hat == doctest::Approx(1.0));

    // with Gamma = 1 instead, Q_hat picks up the full Q weight
    ScalarHatParams q =
        scalar_hat_params(GameModel::scalar(0, 1, 0, 0, 1, 1, 1, 0, 0, 0, 0, 1.0));
    CHECK(q.Q_hat == doctest::Approx(1.0));
    CHECK(q.Delta_hat == doctest::Approx(0.0));
}

TEST_CASE("non-normalized models are rejected")
{
    CHECK_THROWS_WITH(scalar_hat_params(GameModel::scalar(0, 2, 0, 0, 1, 1, 1, 0, 0, 0, 0, 1.0)),
                      "scalar normalization violated");
}

TEST_CASE("Delta identity holds across random scalar models")
{
    CounterRng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const double A = 2.0 * rng.normal(trial, 0, 0, 0);
        const double G = 2.0 * rng.normal(trial, 1, 0, 0);
        const double Q = std::abs(rng.normal(trial, 2, 0, 0)) + 1e-6;
        const double Gam = 2.0 * rng.normal(trial, 3, 0, 0);
        ScalarHatParams p =
            scalar_hat_params(GameModel::scalar(A, 1, G, 0, Q, 1, Gam, 0, 0, 0, 0, 1.0));
        const double other = 0.25 * (2 * A + G) * (2 * A + G) + Q * (1.0 - Gam);
        CHECK(std::abs(p.Delta_hat - other) <= 1e-10 * std::max(1.0, std::abs(other)));
    }
}

TEST_CASE("scalar B = 0 only warns")
{
    GameModel m = GameModel::scalar(0.1, 0.0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 1.0);
    auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].warning);
    CHECK(is_valid(v));
}

TEST_CASE("asymmetric cost matrices are rejected on ingestion")
{
    MatrixXd Q(2, 2);
    Q << 1.0, 0.3, 0.0, 1.0;
    CHECK_THROWS(GameModel::make(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                                 MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2), Q,
                                 MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2), VectorXd::Zero(2),
                                 MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2), VectorXd::Zero(2),
                                 1.0));
}
