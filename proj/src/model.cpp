#include "lqmfg/model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace lqmfg {

namespace {

Eigen::MatrixXd symmetrize_checked(const Eigen::MatrixXd& X, const char* name)
{
    const double scale = std::max(X.norm(), 1.0);
    if ((X - X.transpose()).norm() > tol::asymmetry * scale)
        throw std::invalid_argument(std::string(name) + " asymmetry exceeds tolerance");
    return 0.5 * (X + X.transpose());
}

}  // namespace

GameModel GameModel::make(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd G,
                          Eigen::MatrixXd D, Eigen::MatrixXd Q, Eigen::MatrixXd R,
                          Eigen::MatrixXd Gamma, Eigen::VectorXd eta, Eigen::MatrixXd Qf,
                          Eigen::MatrixXd Gammaf, Eigen::VectorXd etaf, double T)
{
    GameModel m;
    m.n = (int)A.rows();
    m.n1 = (int)B.cols();
    m.n2 = (int)D.cols();
    m.A = std::move(A);
    m.B = std::move(B);
    m.G = std::move(G);
    m.D = std::move(D);
    m.Q = symmetrize_checked(Q, "Q");
    m.R = symmetrize_checked(R, "R");
    m.Gamma = std::move(Gamma);
    m.eta = std::move(eta);
    m.Qf = symmetrize_checked(Qf, "Qf");
    m.Gammaf = std::move(Gammaf);
    m.etaf = std::move(etaf);
    m.T = T;
    return m;
}

GameModel GameModel::scalar(double A, double B, double G, double D, double Q, double R,
                            double Gamma, double eta, double Qf, double Gammaf, double etaf,
                            double T)
{
    auto s = [](double v) { return Eigen::MatrixXd::Constant(1, 1, v); };
    auto sv = [](double v) { return Eigen::VectorXd::Constant(1, v); };
    return make(s(A), s(B), s(G), s(D), s(Q), s(R), s(Gamma), sv(eta), s(Qf), s(Gammaf), sv(etaf),
                T);
}

GameModel GameModel::with_horizon(double T_new) const
{
    GameModel m = *this;
    m.T = T_new;
    return m;
}

std::vector<Violation> validate(const GameModel& m)
{
    std::vector<Violation> out;
    const int n = m.n, n1 = m.n1, n2 = m.n2;

    auto dim = [&](const Eigen::MatrixXd& X, int r, int c, const char* name) {
        if (X.rows() != r || X.cols() != c)
            out.push_back({std::string(name) + " has inconsistent dimensions",
                           (double)(X.rows() * 1000 + X.cols()), false});
    };
    dim(m.A, n, n, "A");
    dim(m.B, n, n1, "B");
    dim(m.G, n, n, "G");
    dim(m.D, n, n2, "D");
    dim(m.Q, n, n, "Q");
    dim(m.R, n1, n1, "R");
    dim(m.Gamma, n, n, "Gamma");
    dim(m.Qf, n, n, "Qf");
    dim(m.Gammaf, n, n, "Gammaf");
    if (m.eta.size() != n) out.push_back({"eta has inconsistent dimension", (double)m.eta.size(), false});
    if (m.etaf.size() != n)
        out.push_back({"etaf has inconsistent dimension", (double)m.etaf.size(), false});
    if (!out.empty()) return out;  // eigensolves need consistent shapes

    if (!(m.T > 0)) out.push_back({"T not positive", m.T, false});

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.compute(m.Q, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::psd)
        out.push_back({"Q not positive semi-definite", es.eigenvalues().minCoeff(), false});
    es.compute(m.Qf, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::psd)
        out.push_back({"Qf not positive semi-definite", es.eigenvalues().minCoeff(), false});
    es.compute(m.R, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < tol::pd)
        out.push_back({"R not positive definite", es.eigenvalues().minCoeff(), false});

    if (m.is_scalar() && m.B.norm() == 0.0)
        out.push_back({"B = 0 makes the scalar model trivial", 0.0, true});

    return out;
}

bool is_valid(const std::vector<Violation>& v)
{
    for (const auto& x : v)
        if (!x.warning) return false;
    return true;
}

Eigen::MatrixXd control_weight(const GameModel& m)
{
    Eigen::LLT<Eigen::MatrixXd> llt(m.R);
    if (llt.info() != Eigen::Success) throw std::runtime_error("R not invertible");
    Eigen::MatrixXd M = m.B * llt.solve(m.B.transpose());
    return 0.5 * (M + M.transpose());
}

ScalarHatParams scalar_hat_params(const GameModel& m)
{
    if (!m.is_scalar()) throw std::invalid_argument("scalar normalization violated");
    const double M = control_weight(m)(0, 0);
    if (std::abs(M - 1.0) > 1e-9) throw std::invalid_argument("scalar normalization violated");

    const double A = m.A(0, 0), G = m.G(0, 0), Q = m.Q(0, 0), Gamma = m.Gamma(0, 0);
    const double root = std::sqrt(A * A + Q);

    ScalarHatParams p;
    p.a_hat = root - 0.5 * G;
    p.Q_hat = Q * Gamma - (A + root) * G;
    p.Delta_hat = p.a_hat * p.a_hat - p.Q_hat;
    p.lambda1_inf = A + root;

    if (p.Delta_hat > tol::case_dispatch) {
        const double sq = std::sqrt(p.Delta_hat);
        p.alpha = sq;
        p.lambda_hat_1 = p.a_hat + sq;
        p.lambda_hat_2 = p.a_hat - sq;
        p.c1 = -p.a_hat - sq;
        p.c2 = -p.a_hat + sq;
        p.lambda_1 = 0.5 * G + sq;
        p.lambda_2 = 0.5 * G - sq;
    }
    if (p.Q_hat - p.a_hat * p.a_hat > tol::case_dispatch) {
        const double b = std::sqrt(p.Q_hat - p.a_hat * p.a_hat);
        p.beta = b;
        p.theta = std::atan2(b, p.a_hat);  // a_hat + i*beta = sqrt(Q_hat) e^{i theta}
    }
    return p;
}

}  // namespace lqmfg
