#pragma once

#include "lqmfg/matrix_path.hpp"
#include "lqmfg/model.hpp"
#include "lqmfg/riccati.hpp"

#include <array>
#include <optional>
#include <vector>

namespace lqmfg {

/// Reduced description of the N-player coupled Riccati system: the four
/// weight blocks of the first player's value matrix, the two offset blocks
/// and the common constant term. All four Pi blocks are integrated as
/// written; Pi3 == Pi4 is verified numerically rather than assumed.
struct ReducedBlocks {
    int N = 0;
    MatrixPath pi1, pi2, pi3, pi4;  // n x n
    MatrixPath theta1, theta2;      // n x 1
    MatrixPath r;                   // 1 x 1
};

struct ReducedOrEscape {
    std::optional<ReducedBlocks> blocks;
    std::optional<EscapeReport> escape;
    bool ok() const { return blocks.has_value(); }
};

/// Integrates the reduced block system backward from T for a population of
/// size N >= 2.
ReducedOrEscape solve_reduced(const GameModel& m, int N, const GridPolicy& grid = {});

/// Brute-force oracle: integrates the full coupled system of all N value
/// matrices (each Nn x Nn), offsets and constants as one flat unstructured
/// state. Restricted to N in {2, 3, 4}.
class FullSolution {
  public:
    FullSolution(int N, int n, OdeSolution sol);

    int N() const { return N_; }
    Eigen::MatrixXd P(int i, double t) const;   // value matrix of player i (0-based)
    Eigen::VectorXd S(int i, double t) const;   // offset vector of player i
    double r(int i, double t) const;            // constant term of player i
    const std::vector<double>& nodes() const { return sol_.t; }

  private:
    int N_, n_;
    OdeSolution sol_;
    MatrixPath state_path_;
};

FullSolution solve_full_oracle(const GameModel& m, int N, const GridPolicy& grid = {});

/// Exchange matrix J_{ij} swapping block rows i and j of I_{Nn} (0-based).
Eigen::MatrixXd exchange_matrix(int N, int n, int i, int j);

/// Nn x Nn assembly of the first player's value matrix from the reduced
/// blocks (three-block pattern, Pi3 on the whole trailing diagonal).
Eigen::MatrixXd assemble_P1(const ReducedBlocks& b, double t);

/// Nn assembly of the first player's offset vector: theta1 in slot 0,
/// theta2 elsewhere.
Eigen::VectorXd assemble_S1(const ReducedBlocks& b, double t);

/// Per-player affine feedback pieces at time t:
///   u_i = K_self X_i + K_other sum_{j != i} X_j + offset.
struct NashGains {
    Eigen::MatrixXd K_self;   // -R^-1 B' Pi1
    Eigen::MatrixXd K_other;  // -R^-1 B' Pi2
    Eigen::VectorXd offset;   // -R^-1 B' theta1
};
NashGains nash_gains(const GameModel& m, const ReducedBlocks& b, double t);

/// Sup-norm distances between the re-scaled finite-N blocks and the limit
/// system, per population size, with fitted log-log slopes.
struct RateReport {
    std::vector<int> Ns;
    // per N: sup|Pi1-L1|, sup|N Pi2 - L2|, sup|N^2 Pi3 - L3|, sup|th1-chi1|, sup|N th2 - chi2|
    std::vector<std::array<double, 5>> sup_errors;
    std::array<double, 5> slopes{};  // NaN where all errors sit below the noise floor
};
RateReport rate_study(const GameModel& m, const LimitSolution& limit, const std::vector<int>& Ns,
                      const GridPolicy& grid = {});

}  // namespace lqmfg
