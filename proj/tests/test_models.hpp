#pragma once

#include "lqmfg/model.hpp"

#include <cmath>

namespace lqmfg::testing {

// A=0.2, B=G=Q=R=1, Gamma=1.2, Gammaf=0; Qf defaults to the stationary
// weight A + sqrt(A^2+Q) so the symmetric flow is constant.
inline GameModel example2(double T = 10.0, double eta = 0.0, double etaf = 0.0)
{
    const double A = 0.2, Q = 1.0;
    return GameModel::scalar(A, 1.0, 1.0, 0.5, Q, 1.0, 1.2, eta, A + std::sqrt(A * A + Q), 0.0,
                             etaf, T);
}

// Same data with Qf = 0: the coupling flow blows up inside [0, 3].
inline GameModel example3(double T = 3.0)
{
    return GameModel::scalar(0.2, 1.0, 1.0, 0.5, 1.0, 1.0, 1.2, 0.0, 0.0, 0.0, 0.0, T);
}

// A=-1/4, G=4/5, Q=1/16, Gamma=4/3 with the stationary terminal weight;
// eta = etaf = 1 for the offset/boundary studies.
inline GameModel example4(double T = 35.0)
{
    const double A = -0.25, Q = 1.0 / 16.0;
    return GameModel::scalar(A, 1.0, 0.8, 0.5, Q, 1.0, 4.0 / 3.0, 1.0, A + std::sqrt(A * A + Q),
                             0.0, 1.0, T);
}

// Two-dimensional instance with a stabilizing steady-state solution.
inline GameModel example5()
{
    Eigen::MatrixXd A(2, 2), B(2, 1), Gamma(2, 2);
    A << 1, 1, -0.5, 1;
    B << 0, 1;
    Gamma << 0.9, 0.1, 0, 0.9;
    Eigen::VectorXd eta(2);
    eta << 1, 0;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    return GameModel::make(A, B, I, I, I, Eigen::MatrixXd::Identity(1, 1), Gamma, eta,
                           Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2),
                           Eigen::VectorXd::Zero(2), 1.0);
}

// Example 5 data with G = -1.2 I: the steady-state spectrum sits entirely in
// the left half-plane, so no (n, n) split exists.
inline GameModel example6()
{
    GameModel m = example5();
    m.G = -1.2 * Eigen::MatrixXd::Identity(2, 2);
    return m;
}

}  // namespace lqmfg::testing
