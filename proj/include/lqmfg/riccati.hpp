#pragma once

#include "lqmfg/matrix_path.hpp"
#include "lqmfg/model.hpp"
#include "lqmfg/ode.hpp"

#include <optional>
#include <variant>

namespace lqmfg {

/// Outcome of a Riccati solve that may terminate at a finite escape time.
struct PathOrEscape {
    std::optional<MatrixPath> path;
    std::optional<EscapeReport> escape;
    bool ok() const { return path.has_value(); }
};

/// Symmetric Riccati flow for the single-agent weight matrix:
///   dL1/dt = L1 M L1 - (L1 A + A' L1) - Q,  L1(T) = Qf.
/// Global existence holds; the state is re-symmetrized after each step and
/// integration failure indicates a tolerance misconfiguration.
MatrixPath solve_lambda1(const GameModel& m, const GridPolicy& grid = {});

/// Non-symmetric Riccati flow for the population-coupling weight:
///   dL2/dt = L1 M L2 + L2 M L1 + L2 M L2
///            - (L1 G + L2 (A+G) + A' L2) + Q Gamma,   L2(T) = -Qf Gammaf.
/// May blow up in finite time; on escape the bracket around the blow-up
/// instant is returned instead of a path.
PathOrEscape solve_lambda2(const GameModel& m, const MatrixPath& lambda1,
                           const GridPolicy& grid = {});

/// Linear flow for the second-order coupling weight (Lambda1/Lambda2 given):
///   dL3/dt = L2' M L2 + L3 M L1 + L1 M L3 + L3 M L2 + L2' M L3
///            - (L2' G + G' L2 + L3 (A+G) + (A'+G') L3) - Gamma' Q Gamma,
///   L3(T) = Gammaf' Qf Gammaf.
MatrixPath solve_lambda3(const GameModel& m, const MatrixPath& lambda1, const MatrixPath& lambda2,
                         const GridPolicy& grid = {});

/// Offset flows:
///   dchi1/dt = (L1 M + L2 M - A') chi1 + Q eta,             chi1(T) = -Qf etaf
///   dchi2/dt = ((L2'+L3) M - G') chi1
///              + ((L1+L2') M - (A'+G')) chi2 - Gamma' Q eta, chi2(T) = Gammaf' Qf etaf
MatrixPath solve_chi1(const GameModel& m, const MatrixPath& lambda1, const MatrixPath& lambda2,
                      const GridPolicy& grid = {});
MatrixPath solve_chi2(const GameModel& m, const MatrixPath& lambda1, const MatrixPath& lambda2,
                      const MatrixPath& lambda3, const MatrixPath& chi1,
                      const GridPolicy& grid = {});

/// Closed-loop mean field, forward from x0:
///   dxbar/dt = (A - M (L1 + L2) + G) xbar - M chi1,  xbar(0) = x0.
MatrixPath solve_mean_field(const GameModel& m, const MatrixPath& lambda1,
                            const MatrixPath& lambda2, const MatrixPath& chi1,
                            const Eigen::VectorXd& x0, const GridPolicy& grid = {});

/// All time-gridded pieces of the infinite-population limit system.
struct LimitSolution {
    MatrixPath lambda1, lambda2, lambda3;
    MatrixPath chi1, chi2;
    MatrixPath xbar;
    Eigen::VectorXd x0;
};

/// Solves the full limit system; empty on Lambda2 escape (the report is
/// filled in instead).
struct LimitOrEscape {
    std::optional<LimitSolution> limit;
    std::optional<EscapeReport> escape;
    bool ok() const { return limit.has_value(); }
};
LimitOrEscape solve_limit(const GameModel& m, const Eigen::VectorXd& x0,
                          const GridPolicy& grid = {});

/// Large-population solvability verdict: solvable iff the non-symmetric
/// Riccati flow reaches t = 0.
struct SolvabilityVerdict {
    bool solvable = false;
    std::optional<EscapeReport> escape;  // estimate in [0, T) when not solvable
    double max_norm_reached = 0;
    GridPolicy grid_used;
};
SolvabilityVerdict check_asymptotic_solvability(const GameModel& m, const GridPolicy& grid = {});

/// Closed-form value of the normalized scalar non-symmetric Riccati solution
/// with zero terminal value; `escaped` flags a vanishing denominator in
/// (t, T].
struct ScalarClosedForm {
    double value = 0;
    bool escaped = false;
};
ScalarClosedForm lambda2_scalar_closed_form(const ScalarHatParams& p, double T, double t);

/// Escape time of the same scalar solution on [0, T], when one exists.
std::optional<double> escape_time_scalar(const ScalarHatParams& p, double T);

/// Horizon-to-escape from the terminal end: T - t_hat, independent of T.
/// Empty when the solution is global.
std::optional<double> scalar_escape_horizon(const ScalarHatParams& p);

}  // namespace lqmfg
