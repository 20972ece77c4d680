#include "lqmfg/nplayer.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace lqmfg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Layout {
    int n;
    int mat = 0;  // n*n
    int off_pi1, off_pi2, off_pi3, off_pi4, off_th1, off_th2, off_r;
    int dim;
    explicit Layout(int n_) : n(n_)
    {
        mat = n * n;
        off_pi1 = 0;
        off_pi2 = mat;
        off_pi3 = 2 * mat;
        off_pi4 = 3 * mat;
        off_th1 = 4 * mat;
        off_th2 = 4 * mat + n;
        off_r = 4 * mat + 2 * n;
        dim = 4 * mat + 2 * n + 1;
    }
};

}  // namespace

ReducedOrEscape solve_reduced(const GameModel& m, int N, const GridPolicy& grid)
{
    if (N < 2) throw std::invalid_argument("solve_reduced requires N >= 2");
    const int n = m.n;
    const Layout L(n);
    const MatrixXd M = control_weight(m);
    const MatrixXd At = m.A.transpose(), Gt = m.G.transpose();
    const MatrixXd I = MatrixXd::Identity(n, n);
    const double iN = 1.0 / N;

    const MatrixXd IGamT = I - iN * m.Gamma.transpose();   // I - Gamma'/N
    const MatrixXd IGam = I - iN * m.Gamma;                // I - Gamma/N
    const MatrixXd IGfT = I - iN * m.Gammaf.transpose();
    const MatrixXd IGf = I - iN * m.Gammaf;

    OdeRhs rhs = [&, M, At, Gt, iN, IGamT, IGam](double, const VectorXd& y, VectorXd& dy) {
        const MatrixXd P1 = unflatten(y, n, n, L.off_pi1);
        const MatrixXd P2 = unflatten(y, n, n, L.off_pi2);
        const MatrixXd P3 = unflatten(y, n, n, L.off_pi3);
        const MatrixXd P4 = unflatten(y, n, n, L.off_pi4);
        const VectorXd t1 = y.segment(L.off_th1, n);
        const VectorXd t2 = y.segment(L.off_th2, n);

        const MatrixXd P2t = P2.transpose();

        MatrixXd d1 = P1 * M * P1 + (N - 1) * (P2 * M * P2 + P2t * M * P2t) -
                      (P1 * (m.A + iN * m.G) + (At + iN * Gt) * P1) -
                      (1.0 - iN) * (P2 * m.G + Gt * P2t) - IGamT * m.Q * IGam;

        MatrixXd d2 = P1 * M * P2 + P2 * M * P1 + P2t * M * P3 + (N - 2) * (P2 * M * P2) +
                      (N - 2) * (P2t * M * P4) -
                      (P1 * (iN * m.G) + (iN * Gt) * P3 + ((N - 2) * iN) * (Gt * P4) +
                       P2 * (m.A + (N - 1) * iN * m.G) + (At + iN * Gt) * P2) +
                      IGamT * m.Q * (iN * m.Gamma);

        MatrixXd d3 = P2t * M * P2 + P3 * M * P1 + P1 * M * P3 +
                      (N - 2) * (P4 * M * P2 + P2t * M * P4) -
                      (iN * (P2t * m.G + Gt * P2) + P3 * (m.A + iN * m.G) + (At + iN * Gt) * P3 +
                       ((N - 2) * iN) * (P4 * m.G + Gt * P4)) -
                      iN * iN * (m.Gamma.transpose() * m.Q * m.Gamma);

        MatrixXd d4 = P2t * M * P2 + P4 * M * P1 + P1 * M * P4 + P3 * M * P2 + P2t * M * P3 +
                      (N - 3) * (P4 * M * P2 + P2t * M * P4) -
                      (iN * (P2t * m.G + Gt * P2 + P3 * m.G + Gt * P3) +
                       P4 * (m.A + (N - 2) * iN * m.G) + (At + (N - 2) * iN * Gt) * P4) -
                      iN * iN * (m.Gamma.transpose() * m.Q * m.Gamma);

        VectorXd dt1 = P1 * M * t1 + (N - 1) * (P2 * M * t1 + P2t * M * t2) -
                       (At + iN * Gt) * t1 - ((N - 1) * iN) * (Gt * t2) + IGamT * (m.Q * m.eta);

        VectorXd dt2 = (P2t + (N - 1) * P3) * M * t1 + (P1 + (N - 2) * P2t) * M * t2 -
                       iN * (Gt * t1) - (At + (N - 1) * iN * Gt) * t2 -
                       iN * (m.Gamma.transpose() * (m.Q * m.eta));

        const double dr = t1.dot(M * t1) + 2.0 * (N - 1) * t2.dot(M * t1) -
                          (m.D.transpose() * P1 * m.D).trace() -
                          (N - 1) * (m.D.transpose() * P3 * m.D).trace() -
                          m.eta.dot(m.Q * m.eta);

        dy.resize(L.dim);
        dy.segment(L.off_pi1, L.mat) = flatten(d1);
        dy.segment(L.off_pi2, L.mat) = flatten(d2);
        dy.segment(L.off_pi3, L.mat) = flatten(d3);
        dy.segment(L.off_pi4, L.mat) = flatten(d4);
        dy.segment(L.off_th1, n) = dt1;
        dy.segment(L.off_th2, n) = dt2;
        dy[L.off_r] = dr;
    };

    VectorXd yT(L.dim);
    yT.segment(L.off_pi1, L.mat) = flatten((IGfT * m.Qf * IGf).eval());
    yT.segment(L.off_pi2, L.mat) = flatten((-IGfT * m.Qf * (iN * m.Gammaf)).eval());
    yT.segment(L.off_pi3, L.mat) =
        flatten((iN * iN * (m.Gammaf.transpose() * m.Qf * m.Gammaf)).eval());
    yT.segment(L.off_pi4, L.mat) = yT.segment(L.off_pi3, L.mat);
    yT.segment(L.off_th1, n) = -IGfT * (m.Qf * m.etaf);
    yT.segment(L.off_th2, n) = iN * (m.Gammaf.transpose() * (m.Qf * m.etaf));
    yT[L.off_r] = m.etaf.dot(m.Qf * m.etaf);

    OdeOptions opts;
    opts.grid = grid;
    OdeSolution sol = integrate_backward(rhs, m.T, 0.0, yT, opts);

    ReducedOrEscape out;
    if (sol.escaped) {
        out.escape = sol.escape;
        return out;
    }
    if (sol.failed) throw std::runtime_error("reduced system integration failed: " + sol.error);

    ReducedBlocks b;
    b.N = N;
    b.pi1 = solution_block_path(sol, L.off_pi1, n, n);
    b.pi2 = solution_block_path(sol, L.off_pi2, n, n);
    b.pi3 = solution_block_path(sol, L.off_pi3, n, n);
    b.pi4 = solution_block_path(sol, L.off_pi4, n, n);
    b.theta1 = solution_block_path(sol, L.off_th1, n, 1);
    b.theta2 = solution_block_path(sol, L.off_th2, n, 1);
    b.r = solution_block_path(sol, L.off_r, 1, 1);
    out.blocks = std::move(b);
    return out;
}

FullSolution::FullSolution(int N, int n, OdeSolution sol) : N_(N), n_(n), sol_(std::move(sol))
{
    state_path_ = solution_block_path(sol_, 0, (int)sol_.y[0].size(), 1);
}

Eigen::MatrixXd FullSolution::P(int i, double t) const
{
    const int Nn = N_ * n_;
    VectorXd y = state_path_.eval(t);
    return unflatten(y, Nn, Nn, i * Nn * Nn);
}

Eigen::VectorXd FullSolution::S(int i, double t) const
{
    const int Nn = N_ * n_;
    VectorXd y = state_path_.eval(t);
    return y.segment(N_ * Nn * Nn + i * Nn, Nn);
}

double FullSolution::r(int i, double t) const
{
    const int Nn = N_ * n_;
    VectorXd y = state_path_.eval(t);
    return y[N_ * Nn * Nn + N_ * Nn + i];
}

FullSolution solve_full_oracle(const GameModel& m, int N, const GridPolicy& grid)
{
    if (N < 2 || N > 4) throw std::invalid_argument("full oracle restricted to N in {2,3,4}");
    const int n = m.n, Nn = N * n;
    const MatrixXd M = control_weight(m);

    // A_hat = diag(A,...,A) + ones(N,N) (x) G/N
    MatrixXd Ahat = MatrixXd::Zero(Nn, Nn);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            Ahat.block(i * n, j * n, n, n) = m.G / N;
            if (i == j) Ahat.block(i * n, j * n, n, n) += m.A;
        }
    const MatrixXd AhatT = Ahat.transpose();

    // K_i = [0 .. I .. 0] - (1/N)[Gamma .. Gamma], row block i
    auto K_of = [&](int i, const MatrixXd& coupling) {
        MatrixXd K = MatrixXd::Zero(n, Nn);
        for (int j = 0; j < N; ++j) K.block(0, j * n, n, n) = -coupling / N;
        K.block(0, i * n, n, n) += MatrixXd::Identity(n, n);
        return K;
    };

    std::vector<MatrixXd> Ki(N), Kif(N), Qi(N), Qif(N);
    for (int i = 0; i < N; ++i) {
        Ki[i] = K_of(i, m.Gamma);
        Kif[i] = K_of(i, m.Gammaf);
        Qi[i] = Ki[i].transpose() * m.Q * Ki[i];
        Qif[i] = Kif[i].transpose() * m.Qf * Kif[i];
    }

    MatrixXd Dhat = MatrixXd::Zero(Nn, N * m.n2);
    for (int i = 0; i < N; ++i) Dhat.block(i * n, i * m.n2, n, m.n2) = m.D;

    const int pdim = Nn * Nn;
    const int dim = N * pdim + N * Nn + N;
    const double etaQeta = m.eta.dot(m.Q * m.eta);

    OdeRhs rhs = [&, M, Ahat, AhatT, Qi, Dhat, etaQeta](double, const VectorXd& y, VectorXd& dy) {
        std::vector<MatrixXd> P(N);
        std::vector<VectorXd> S(N);
        for (int i = 0; i < N; ++i) {
            P[i] = unflatten(y, Nn, Nn, i * pdim);
            S[i] = y.segment(N * pdim + i * Nn, Nn);
        }
        // Omega  = sum_k (E_kk (x) M) P_k : block-row k is M * (row block k of P_k)
        // OmegaR = sum_k P_k (E_kk (x) M) : block-col k is (col block k of P_k) * M
        MatrixXd Omega = MatrixXd::Zero(Nn, Nn), OmegaR = MatrixXd::Zero(Nn, Nn);
        VectorXd omega = VectorXd::Zero(Nn);
        for (int k = 0; k < N; ++k) {
            Omega.block(k * n, 0, n, Nn) = M * P[k].block(k * n, 0, n, Nn);
            OmegaR.block(0, k * n, Nn, n) = P[k].block(0, k * n, Nn, n) * M;
            omega.segment(k * n, n) = M * S[k].segment(k * n, n);
        }
        dy.resize(dim);
        for (int i = 0; i < N; ++i) {
            // P_i (E_ii (x) M) X applied via the i-th row/col blocks
            MatrixXd PiEM_P = P[i].block(0, i * n, Nn, n) * M * P[i].block(i * n, 0, n, Nn);
            MatrixXd dP = -(P[i] * Ahat + AhatT * P[i]) + P[i] * Omega + OmegaR * P[i] - PiEM_P -
                          Qi[i];
            dy.segment(i * pdim, pdim) = flatten(dP);

            VectorXd PiEM_S = P[i].block(0, i * n, Nn, n) * (M * S[i].segment(i * n, n));
            VectorXd dS = -AhatT * S[i] - PiEM_S + P[i] * omega + OmegaR * S[i] +
                          Ki[i].transpose() * (m.Q * m.eta);
            dy.segment(N * pdim + i * Nn, Nn) = dS;

            const double SiEM_Si = S[i].segment(i * n, n).dot(M * S[i].segment(i * n, n));
            dy[N * pdim + N * Nn + i] = 2.0 * S[i].dot(omega) - SiEM_Si - etaQeta -
                                        (Dhat.transpose() * P[i] * Dhat).trace();
        }
    };

    VectorXd yT(dim);
    for (int i = 0; i < N; ++i) {
        yT.segment(i * pdim, pdim) = flatten(Qif[i]);
        yT.segment(N * pdim + i * Nn, Nn) = -Kif[i].transpose() * (m.Qf * m.etaf);
        yT[N * pdim + N * Nn + i] = m.etaf.dot(m.Qf * m.etaf);
    }

    OdeOptions opts;
    opts.grid = grid;
    OdeSolution sol = integrate_backward(rhs, m.T, 0.0, yT, opts);
    if (sol.escaped || sol.failed)
        throw std::runtime_error("full oracle integration did not reach t=0: " + sol.error);
    return FullSolution(N, n, std::move(sol));
}

Eigen::MatrixXd exchange_matrix(int N, int n, int i, int j)
{
    MatrixXd J = MatrixXd::Identity(N * n, N * n);
    J.block(i * n, i * n, n, n).setZero();
    J.block(j * n, j * n, n, n).setZero();
    J.block(i * n, j * n, n, n) = MatrixXd::Identity(n, n);
    J.block(j * n, i * n, n, n) = MatrixXd::Identity(n, n);
    return J;
}

Eigen::MatrixXd assemble_P1(const ReducedBlocks& b, double t)
{
    const int n = b.pi1.rows(), N = b.N, Nn = N * n;
    const MatrixXd P1 = b.pi1.eval(t), P2 = b.pi2.eval(t), P3 = b.pi3.eval(t);
    MatrixXd out(Nn, Nn);
    out.block(0, 0, n, n) = P1;
    for (int j = 1; j < N; ++j) {
        out.block(0, j * n, n, n) = P2;
        out.block(j * n, 0, n, n) = P2.transpose();
        for (int k = 1; k < N; ++k) out.block(j * n, k * n, n, n) = P3;
    }
    return out;
}

Eigen::VectorXd assemble_S1(const ReducedBlocks& b, double t)
{
    const int n = b.theta1.rows(), N = b.N;
    const VectorXd t1 = b.theta1.eval(t), t2 = b.theta2.eval(t);
    VectorXd out(N * n);
    out.segment(0, n) = t1;
    for (int j = 1; j < N; ++j) out.segment(j * n, n) = t2;
    return out;
}

NashGains nash_gains(const GameModel& m, const ReducedBlocks& b, double t)
{
    Eigen::LLT<Eigen::MatrixXd> llt(m.R);
    const MatrixXd RinvBt = llt.solve(m.B.transpose());
    NashGains g;
    g.K_self = -RinvBt * b.pi1.eval(t);
    g.K_other = -RinvBt * b.pi2.eval(t);
    g.offset = -RinvBt * b.theta1.eval(t);
    return g;
}

RateReport rate_study(const GameModel& m, const LimitSolution& limit, const std::vector<int>& Ns,
                      const GridPolicy& grid)
{
    if (Ns.size() < 2) throw std::invalid_argument("rate_study needs at least two population sizes");
    RateReport rep;
    rep.Ns = Ns;

    for (int N : Ns) {
        ReducedOrEscape red = solve_reduced(m, N, grid);
        if (!red.ok())
            throw std::runtime_error("rate_study: finite-N system escaped at N=" +
                                     std::to_string(N));
        const ReducedBlocks& b = *red.blocks;
        std::array<double, 5> err{0, 0, 0, 0, 0};
        for (double t : limit.lambda1.nodes()) {
            err[0] = std::max(err[0], (b.pi1.eval(t) - limit.lambda1.eval(t)).norm());
            err[1] = std::max(err[1], (double(N) * b.pi2.eval(t) - limit.lambda2.eval(t)).norm());
            err[2] = std::max(
                err[2], (double(N) * N * b.pi3.eval(t) - limit.lambda3.eval(t)).norm());
        }
        for (double t : limit.chi1.nodes()) {
            err[3] = std::max(err[3], (b.theta1.eval(t) - limit.chi1.eval(t)).norm());
            err[4] = std::max(err[4], (double(N) * b.theta2.eval(t) - limit.chi2.eval(t)).norm());
        }
        rep.sup_errors.push_back(err);
    }

    // least-squares slope of log(err) vs log(N), ignoring the integration
    // noise floor
    for (int c = 0; c < 5; ++c) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int k = 0;
        for (size_t i = 0; i < Ns.size(); ++i) {
            const double e = rep.sup_errors[i][c];
            if (e < 1e-12) continue;
            const double x = std::log((double)Ns[i]), y = std::log(e);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
            ++k;
        }
        rep.slopes[c] = (k >= 2) ? (k * sxy - sx * sy) / (k * sxx - sx * sx)
                                 : std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

}  // namespace lqmfg
