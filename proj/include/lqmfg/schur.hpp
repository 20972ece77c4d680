#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>

namespace lqmfg {

/// Ordered real Schur decomposition A = U T U' with the blocks selected by
/// `select` moved to the leading position. Complex-conjugate eigenpairs stay
/// in 2 x 2 real blocks throughout.
struct OrderedSchur {
    Eigen::MatrixXd T;  // quasi-upper-triangular, selected cluster leading
    Eigen::MatrixXd U;  // orthogonal
    int cluster_dim = 0;
    bool ok = false;
    std::string error;
};

/// `select` receives the real and imaginary part of a block eigenvalue and
/// decides membership in the leading cluster.
OrderedSchur ordered_real_schur(const Eigen::MatrixXd& A,
                                const std::function<bool(double re, double im)>& select);

/// Largest real part over the spectrum.
double spectral_abscissa(const Eigen::MatrixXd& A);

}  // namespace lqmfg
