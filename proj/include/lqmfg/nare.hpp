#pragma once

#include "lqmfg/model.hpp"
#include "lqmfg/schur.hpp"

#include <Eigen/Core>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace lqmfg {

/// Stationary solution of the symmetric Riccati flow:
///   L M L - (L A + A' L) - Q = 0,
/// the unique positive semi-definite stabilizing branch.
struct AREResult {
    Eigen::MatrixXd lambda1_inf;
    double residual = 0;
    Eigen::MatrixXd closed_loop;      // A - M lambda1_inf
    double closed_loop_abscissa = 0;  // spectral abscissa of the closed loop
    double transient_gap = 0;         // distance to the long-horizon transient cross-check
};
AREResult solve_are(const GameModel& m);

/// Steady-state system matrix
///   [[A - M L1inf + G, -M], [Q Gamma - L1inf G, -A' + L1inf M]].
Eigen::MatrixXd build_A_infinity(const GameModel& m, const AREResult& are);

/// Half-plane eigenvalue split of a 2n x 2n matrix plus a real orthonormal
/// basis U = [U1; U2] of the stable invariant subspace (stable cluster led).
struct SpectralSplit {
    Eigen::MatrixXd A_inf;
    std::vector<std::complex<double>> eigenvalues;
    int n_stable = 0;
    int n_unstable = 0;
    bool strong_splitting = false;  // no eigenvalue within tol of the imaginary axis
    Eigen::MatrixXd U;              // 2n x n_stable
    double sigma_min_U1 = 0;        // smallest singular value of the top block
    double invariance_residual = 0;
};
SpectralSplit spectral_split(const Eigen::MatrixXd& A_inf);

enum class NareVerdict { stabilizing_solution, no_splitting, not_graph };
std::string to_string(NareVerdict v);

/// Stabilizing solution of the non-symmetric algebraic Riccati equation
///   L1 M L2 + L2 M L1 + L2 M L2 - (L1 G + L2 (A+G) + A' L2) + Q Gamma = 0
/// via the graph of the stable invariant subspace: L2 = U2 U1^-1.
struct NareResult {
    NareVerdict verdict = NareVerdict::no_splitting;
    Eigen::MatrixXd lambda1_inf;
    std::optional<Eigen::MatrixXd> lambda2_inf;
    Eigen::MatrixXd A_G, A_M;
    bool hurwitz_AG = false, hurwitz_AM = false;
    double abscissa_AG = 0, abscissa_AM = 0;
    double residual = 0;
    SpectralSplit split;
};
NareResult stabilizing_solution(const GameModel& m, const AREResult& are,
                                const SpectralSplit& split);
NareResult stabilizing_solution(const GameModel& m);

/// Stationary offset chi1_inf solving A_M' chi1_inf = Q eta; requires A_M
/// Hurwitz.
struct LimitingOffset {
    Eigen::VectorXd chi1_inf;
    double residual = 0;
};
LimitingOffset limiting_offset(const GameModel& m, const NareResult& nare);

/// Perturbs the stationary point of the time-reversed non-symmetric Riccati
/// flow by delta * E (E random, unit Frobenius norm) and records the decay of
/// |Y(t) - L2inf|.
struct StabilityProbe {
    std::vector<double> t;
    std::vector<double> distance;
    bool diverged = false;
};
StabilityProbe local_stability_probe(const GameModel& m, const NareResult& nare, double delta,
                                     double t_end, std::uint64_t seed = 0);

double nare_residual(const GameModel& m, const Eigen::MatrixXd& lambda1_inf,
                     const Eigen::MatrixXd& lambda2_inf);

namespace tol {
inline constexpr double hurwitz = 1e-9;
inline constexpr double split = 1e-9;
}  // namespace tol

}  // namespace lqmfg
