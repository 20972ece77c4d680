#pragma once

#include "lqmfg/matrix_path.hpp"
#include "lqmfg/model.hpp"
#include "lqmfg/riccati.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace lqmfg {

/// Transition families of the linear mean-field/costate system
///   d/dt [xbar; s] = AA(t) [xbar; s] + [0; Q eta],
///   AA(t) = [[A - M L1 + G, -M], [Q Gamma - L1 G, -A' + L1 M]].
/// Both Phi(t, 0) over t and Phi(T, tau) over tau are stored; the forced
/// integral needed by the boundary map is accumulated alongside the adjoint
/// sweep.
class FundamentalBlocks {
  public:
    FundamentalBlocks(int n, MatrixPath phi_t0, MatrixPath phi_T_tau, MatrixPath forced,
                      MatrixPath lambda1);

    int n() const { return n_; }
    double T() const { return phi_t0_.t1(); }
    const MatrixPath& lambda1() const { return lambda1_; }

    Eigen::MatrixXd phi(double t) const { return phi_t0_.eval(t); }        // Phi(t, 0)
    Eigen::MatrixXd phi_from(double tau) const { return phi_T_tau_.eval(tau); }  // Phi(T, tau)

    Eigen::MatrixXd phi11(double t) const;
    Eigen::MatrixXd phi12(double t) const;
    Eigen::MatrixXd phi21(double t) const;
    Eigen::MatrixXd phi22(double t) const;

    /// integral over [0, T] of [Phi22 + Qf Gammaf Phi12](T, tau) Q eta dtau
    Eigen::VectorXd forced_integral() const { return forced_.eval(forced_.t0()); }

    const MatrixPath& phi_t0_path() const { return phi_t0_; }
    const MatrixPath& phi_T_tau_path() const { return phi_T_tau_; }

  private:
    int n_;
    MatrixPath phi_t0_, phi_T_tau_, forced_, lambda1_;
};

Eigen::MatrixXd tpbv_system_matrix(const GameModel& m, const Eigen::MatrixXd& lambda1_t);

FundamentalBlocks fundamental_matrix(const GameModel& m, const MatrixPath& lambda1,
                                     const GridPolicy& grid = {});

enum class TpbvVerdict { unique, infinite, none, ill_conditioned };
std::string to_string(TpbvVerdict v);

/// Boundary-map classification of the two-point boundary value problem.
/// Z1 s(0) + Z2 = 0 encodes the terminal condition; the verdict follows the
/// numerical rank of Z1 and range membership of Z2 with a gray band around
/// the rank decision.
struct TPBVOutcome {
    Eigen::MatrixXd Z1;
    Eigen::VectorXd Z2;
    TpbvVerdict verdict = TpbvVerdict::ill_conditioned;
    double sigma_min = 0, sigma_max = 0, scale_ref = 0;
    int null_dim = 0;
    Eigen::MatrixXd null_basis;           // columns span ker(Z1) (numerical)
    std::optional<Eigen::VectorXd> s0;    // initial costate (particular one if infinite)
    std::optional<MatrixPath> xbar_path;  // recovered solution when s0 exists
    std::optional<MatrixPath> s_path;
    double boundary_residual = 0;
};
TPBVOutcome classify(const GameModel& m, const FundamentalBlocks& blocks,
                     const Eigen::VectorXd& x0, const GridPolicy& grid = {});

/// Forward sweep of the coupled system from (x0, s0); returns the two n x 1
/// paths.
std::pair<MatrixPath, MatrixPath> solve_tpbv_forward(const GameModel& m,
                                                     const MatrixPath& lambda1,
                                                     const Eigen::VectorXd& x0,
                                                     const Eigen::VectorXd& s0,
                                                     const GridPolicy& grid = {});

/// sup-t distances between the fixed-point solution and the direct-approach
/// reconstruction s = L2 xbar + chi1.
struct ConsistencyReport {
    double sup_s_residual = 0;
    double sup_xbar_gap = 0;
};
ConsistencyReport consistency_with_direct(const GameModel& m, const LimitSolution& limit,
                                          const TPBVOutcome& outcome);

/// Contraction constant of the fixed-point map at t0 = 0, by composite
/// Simpson quadrature of spectral-norm integrands on a uniform grid.
struct ContractionEstimate {
    double kappa0 = 0;
    double quad_error = 0;  // difference against the half-resolution grid
    int nodes = 0;
};
ContractionEstimate contraction_kappa0(const GameModel& m, const MatrixPath& lambda1,
                                       int nodes = 401);

/// Scalar-case closed forms of the lower transition blocks (constant-
/// coefficient normalization Qf = Lambda1inf, Gammaf = 0, M = 1).
double phi21_closed(const ScalarHatParams& p, double dt);
double phi22_closed(const ScalarHatParams& p, double dt);

/// Unique horizon T_hat with Phi22(T_hat, 0) = 0, closed form
/// ln(c2/c1) / (2 sqrt(Delta)). Requires 0 < Q_hat < a_hat^2 and a_hat < 0.
double find_hat_T(const ScalarHatParams& p);

/// Initial mean x0_hat solving
///   Phi21(T_hat,0) x0_hat + int_0^T_hat Phi22(T_hat,tau) Q eta dtau = -L1inf etaf
/// by the closed-form quadrature identity.
double find_hat_x0(const GameModel& m, const ScalarHatParams& p, double T_hat);

/// A scalar instance at (T_hat, x0_hat) where the boundary map degenerates:
/// every initial costate yields a solution. Each witness s(0) is integrated
/// forward and its terminal condition verified.
struct NonUniqInstance {
    GameModel model_hat;  // horizon T_hat
    double T_hat = 0;
    double x0_hat = 0;
    double phi22_rel = 0;  // |Phi22(T_hat,0)| relative to the Phi scale
    std::vector<double> witnesses;
    std::vector<std::pair<MatrixPath, MatrixPath>> paths;  // (xbar, s) per witness
    std::vector<double> terminal_residuals;
    bool ok = false;
};
NonUniqInstance build_nonuniqueness_instance(const GameModel& m,
                                             const std::vector<double>& s0_witnesses,
                                             const GridPolicy& grid = {});

}  // namespace lqmfg
