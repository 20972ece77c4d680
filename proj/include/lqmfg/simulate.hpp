#pragma once

#include "lqmfg/matrix_path.hpp"
#include "lqmfg/model.hpp"
#include "lqmfg/nplayer.hpp"
#include "lqmfg/riccati.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lqmfg {

/// Initial-state law of the player population: either an explicit list of
/// deterministic starting points or i.i.d. Gaussian draws.
struct InitialLaw {
    enum class Kind { deterministic, gaussian } kind = Kind::deterministic;
    std::vector<Eigen::VectorXd> values;  // one per player (deterministic)
    Eigen::VectorXd mean;                 // gaussian
    Eigen::MatrixXd cov;                  // gaussian, n x n PSD

    static InitialLaw all_equal(const Eigen::VectorXd& x, int N);
    static InitialLaw gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);
};

struct SimConfig {
    int N = 0;
    int paths = 1;
    double dt = 0;
    std::uint64_t seed = 0;
    InitialLaw initial_law;
};

/// One of the three candidate control laws, with whatever coefficient paths
/// that law needs on [0, T]:
///   exact_nash:           u_i = -R^-1 B'(Pi1 X_i + Pi2 sum_{j!=i} X_j + theta1)
///   direct_decentralized: u_i = -R^-1 B'(L1 X_i + L2 xbar + chi1)
///   fixed_point:          u_i = -R^-1 B'(L1 X_i + s)
struct StrategyProfile {
    enum class Kind { exact_nash, direct_decentralized, fixed_point } kind;
    MatrixPath own_gain;           // Pi1 or Lambda1
    MatrixPath other_gain;         // Pi2 (exact_nash only)
    MatrixPath offset;             // theta1 / (L2 xbar + chi1 folded at runtime) / s
    std::optional<MatrixPath> mean_weight;  // Lambda2 (direct only)
    std::optional<MatrixPath> mean_path;    // xbar (direct only)

    static StrategyProfile exact_nash(const ReducedBlocks& blocks);
    static StrategyProfile direct_decentralized(const LimitSolution& limit);
    static StrategyProfile fixed_point(const MatrixPath& lambda1, const MatrixPath& s);
};
std::string to_string(StrategyProfile::Kind k);

struct CostEstimate {
    double mean = 0;
    double std_error = 0;
};

/// Ensemble statistics of the simulated population.
struct EnsembleStats {
    std::vector<double> t;                      // simulation grid
    std::vector<Eigen::VectorXd> mean_pop_avg;  // across-members mean of X^(N)(t)
    double mse_vs_xbar = 0;                     // sup_t avg_m |X^(N) - xbar|^2
    std::vector<double> mse_path;               // the same quantity per node
    std::vector<CostEstimate> costs;            // per player
};

/// Euler-Maruyama simulation of the N-player system under `profile`, with
/// Brownian increments keyed by (seed, member, player, step, component) so
/// runs are reproducible and noise is shared across compared profiles.
/// `xbar_ref` is the deterministic mean-field benchmark for the mse output.
EnsembleStats simulate_ensemble(const GameModel& m, const SimConfig& config,
                                const StrategyProfile& profile, const MatrixPath& xbar_ref);

/// Trapezoidal cost of one player's realized trajectory against the realized
/// population average, plus the terminal penalty.
double evaluate_cost(const GameModel& m, const std::vector<double>& t,
                     const std::vector<Eigen::VectorXd>& player_path,
                     const std::vector<Eigen::VectorXd>& pop_avg_path,
                     const std::vector<Eigen::VectorXd>& control_path);

/// Deterministic pairwise-tree sum (reduction order fixed by index).
double pairwise_sum(const std::vector<double>& v);

}  // namespace lqmfg
