#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace lqmfg {

/// Constant problem data of one linear-quadratic mean field game instance.
///
/// Dynamics   dX_i = (A X_i + B u_i + G X^(N)) dt + D dW_i
/// Cost       int_0^T |X_i - Gamma X^(N) - eta|_Q^2 + u_i' R u_i dt
///            + |X_i(T) - Gammaf X^(N)(T) - etaf|_Qf^2
///
/// Instances are immutable after construction and safe to share across
/// threads. Q, R, Qf are symmetrized on ingestion; construction rejects
/// inputs whose asymmetry exceeds 1e-8 relative.
struct GameModel {
    int n = 0;   // state dimension
    int n1 = 0;  // control dimension
    int n2 = 0;  // noise dimension

    Eigen::MatrixXd A, B, G, D;
    Eigen::MatrixXd Q, R, Gamma;
    Eigen::VectorXd eta;
    Eigen::MatrixXd Qf, Gammaf;
    Eigen::VectorXd etaf;
    double T = 0;

    static GameModel make(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd G,
                          Eigen::MatrixXd D, Eigen::MatrixXd Q, Eigen::MatrixXd R,
                          Eigen::MatrixXd Gamma, Eigen::VectorXd eta, Eigen::MatrixXd Qf,
                          Eigen::MatrixXd Gammaf, Eigen::VectorXd etaf, double T);

    /// Convenience constructor for scalar (n = n1 = n2 = 1) instances.
    static GameModel scalar(double A, double B, double G, double D, double Q, double R,
                            double Gamma, double eta, double Qf, double Gammaf, double etaf,
                            double T);

    GameModel with_horizon(double T_new) const;
    bool is_scalar() const { return n == 1 && n1 == 1; }
};

struct Violation {
    std::string what;
    double value = 0;
    bool warning = false;  // advisory only, does not make the model inadmissible
};

/// Checks every model invariant (dimension consistency, Q/Qf >= 0, R > 0,
/// T > 0). Diagnostics are the return value: the model is admissible iff no
/// non-warning entry is present.
std::vector<Violation> validate(const GameModel& m);
bool is_valid(const std::vector<Violation>& v);

/// M = B R^-1 B', symmetrized. Throws std::runtime_error("R not invertible")
/// if R is numerically singular.
Eigen::MatrixXd control_weight(const GameModel& m);

/// Derived scalar parameters for normalized scalar models (n = n1 = 1 and
/// M = B^2/R = 1):
///   a_hat   = sqrt(A^2+Q) - G/2
///   Q_hat   = Q*Gamma - (A + sqrt(A^2+Q))*G
///   Delta   = a_hat^2 - Q_hat
/// plus, where defined, the characteristic roots a_hat +- alpha of the
/// linearized second-order equation, the constants c1/c2, the eigen-roots
/// G/2 +- sqrt(Delta) and the oscillatory phase theta.
struct ScalarHatParams {
    double a_hat = 0;
    double Q_hat = 0;
    double Delta_hat = 0;
    double lambda1_inf = 0;  // A + sqrt(A^2+Q)
    std::optional<double> alpha;                     // sqrt(Delta), Delta > 0
    std::optional<double> beta;                      // sqrt(Q_hat - a_hat^2), Q_hat > a_hat^2
    std::optional<double> theta;                     // phase in (0, pi), Q_hat > a_hat^2
    std::optional<double> lambda_hat_1, lambda_hat_2;  // a_hat +- alpha
    std::optional<double> c1, c2;                    // -a_hat -+ sqrt(Delta)
    std::optional<double> lambda_1, lambda_2;        // G/2 +- sqrt(Delta)
};

/// Throws std::invalid_argument("scalar normalization violated") unless
/// n = n1 = 1 and M = 1.
ScalarHatParams scalar_hat_params(const GameModel& m);

namespace tol {
inline constexpr double psd = 1e-10;        // smallest-eigenvalue slack for Q, Qf
inline constexpr double pd = 1e-12;         // smallest-eigenvalue floor for R
inline constexpr double asymmetry = 1e-8;   // relative, on ingested Q, R, Qf
inline constexpr double case_dispatch = 1e-12;  // scalar closed-form trichotomy band
}  // namespace tol

}  // namespace lqmfg
