#include "lqmfg/nare.hpp"

#include "lqmfg/ode.hpp"
#include "lqmfg/riccati.hpp"
#include "lqmfg/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace lqmfg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

}  // namespace

AREResult solve_are(const GameModel& m)
{
    const int n = m.n;
    const MatrixXd M = control_weight(m);

    MatrixXd H(2 * n, 2 * n);
    H << m.A, -M, -m.Q, -m.A.transpose();

    OrderedSchur os = ordered_real_schur(H, [](double re, double) { return re < 0; });
    if (!os.ok || os.cluster_dim != n)
        throw std::runtime_error("(H1) likely violated: no n-dimensional stable subspace");

    const MatrixXd U1 = os.U.topLeftCorner(n, n);
    const MatrixXd U2 = os.U.bottomLeftCorner(n, n);
    Eigen::FullPivLU<MatrixXd> lu(U1);
    if (!lu.isInvertible())
        throw std::runtime_error("(H1) likely violated: stable subspace is not a graph");

    AREResult r;
    MatrixXd L = U2 * lu.inverse();
    r.lambda1_inf = 0.5 * (L + L.transpose());
    r.residual = (r.lambda1_inf * M * r.lambda1_inf -
                  (r.lambda1_inf * m.A + m.A.transpose() * r.lambda1_inf) - m.Q)
                     .norm();
    r.closed_loop = m.A - M * r.lambda1_inf;
    r.closed_loop_abscissa = spectral_abscissa(r.closed_loop);

    // second route: run the transient to stationarity over a long horizon
    const double rate = std::max(-r.closed_loop_abscissa, 1e-2);
    GameModel probe = m.with_horizon(40.0 / rate);
    probe.Qf = MatrixXd::Zero(n, n);
    MatrixPath l1 = solve_lambda1(probe);
    r.transient_gap = (l1.eval(0.0) - r.lambda1_inf).norm();
    if (r.transient_gap > 1e-6)
        throw std::runtime_error("ARE cross-check disagreement: conditioning suspect");
    return r;
}

Eigen::MatrixXd build_A_infinity(const GameModel& m, const AREResult& are)
{
    const int n = m.n;
    const MatrixXd M = control_weight(m);
    MatrixXd Ainf(2 * n, 2 * n);
    Ainf << m.A - M * are.lambda1_inf + m.G, -M, m.Q * m.Gamma - are.lambda1_inf * m.G,
        -m.A.transpose() + are.lambda1_inf * M;
    return Ainf;
}

SpectralSplit spectral_split(const Eigen::MatrixXd& A_inf)
{
    SpectralSplit s;
    s.A_inf = A_inf;
    const int n2 = (int)A_inf.rows();

    Eigen::EigenSolver<MatrixXd> es(A_inf);
    s.strong_splitting = true;
    for (int i = 0; i < n2; ++i) {
        const std::complex<double> ev = es.eigenvalues()[i];
        s.eigenvalues.push_back(ev);
        if (std::abs(ev.real()) < tol::split)
            s.strong_splitting = false;
        else if (ev.real() < 0)
            ++s.n_stable;
        else
            ++s.n_unstable;
    }
    if (s.n_stable == 0) return s;

    OrderedSchur os = ordered_real_schur(A_inf, [](double re, double) { return re < 0; });
    if (!os.ok) throw std::runtime_error("spectral split failed: " + os.error);
    s.U = os.U.leftCols(os.cluster_dim);

    const int n = n2 / 2;
    const int k = (int)s.U.cols();
    Eigen::JacobiSVD<MatrixXd> svd(s.U.topRows(n).leftCols(std::min(k, n)));
    s.sigma_min_U1 = (std::min(k, n) > 0) ? svd.singularValues().minCoeff() : 0.0;

    // U is orthonormal, so the compression U' A U certifies invariance
    s.invariance_residual = (A_inf * s.U - s.U * (s.U.transpose() * A_inf * s.U)).norm();
    return s;
}

std::string to_string(NareVerdict v)
{
    switch (v) {
        case NareVerdict::stabilizing_solution: return "stabilizing_solution";
        case NareVerdict::no_splitting: return "no_splitting";
        case NareVerdict::not_graph: return "not_graph";
    }
    return "?";
}

double nare_residual(const GameModel& m, const Eigen::MatrixXd& L1, const Eigen::MatrixXd& L2)
{
    const MatrixXd M = control_weight(m);
    return (L1 * M * L2 + L2 * M * L1 + L2 * M * L2 -
            (L1 * m.G + L2 * (m.A + m.G) + m.A.transpose() * L2) + m.Q * m.Gamma)
        .norm();
}

NareResult stabilizing_solution(const GameModel& m, const AREResult& are,
                                const SpectralSplit& split)
{
    const int n = m.n;
    const MatrixXd M = control_weight(m);
    NareResult r;
    r.split = split;
    r.lambda1_inf = are.lambda1_inf;

    if (!split.strong_splitting || split.n_stable != n || split.n_unstable != n) {
        r.verdict = NareVerdict::no_splitting;
        return r;
    }
    const MatrixXd U1 = split.U.topRows(n);
    const MatrixXd U2 = split.U.bottomRows(n);
    Eigen::JacobiSVD<MatrixXd> svd(U1, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues().maxCoeff();
    if (svd.singularValues().minCoeff() <= 1e-9 * smax) {
        r.verdict = NareVerdict::not_graph;
        return r;
    }

    r.lambda2_inf = U2 * svd.solve(MatrixXd::Identity(n, n));
    r.verdict = NareVerdict::stabilizing_solution;
    r.residual = nare_residual(m, are.lambda1_inf, *r.lambda2_inf);
    r.A_G = m.A - M * (are.lambda1_inf + *r.lambda2_inf) + m.G;
    r.A_M = m.A - M * (are.lambda1_inf + r.lambda2_inf->transpose());
    r.abscissa_AG = spectral_abscissa(r.A_G);
    r.abscissa_AM = spectral_abscissa(r.A_M);
    r.hurwitz_AG = r.abscissa_AG < -tol::hurwitz;
    r.hurwitz_AM = r.abscissa_AM < -tol::hurwitz;
    return r;
}

NareResult stabilizing_solution(const GameModel& m)
{
    AREResult are = solve_are(m);
    SpectralSplit split = spectral_split(build_A_infinity(m, are));
    return stabilizing_solution(m, are, split);
}

LimitingOffset limiting_offset(const GameModel& m, const NareResult& nare)
{
    if (nare.verdict != NareVerdict::stabilizing_solution || !nare.hurwitz_AM)
        throw std::invalid_argument("limiting offset requires a stabilizing solution");
    LimitingOffset o;
    const VectorXd rhs = m.Q * m.eta;
    o.chi1_inf = nare.A_M.transpose().fullPivLu().solve(rhs);
    o.residual = (nare.A_M.transpose() * o.chi1_inf - rhs).norm();
    return o;
}

StabilityProbe local_stability_probe(const GameModel& m, const NareResult& nare, double delta,
                                     double t_end, std::uint64_t seed)
{
    if (nare.verdict != NareVerdict::stabilizing_solution)
        throw std::invalid_argument("stability probe requires a stabilizing solution");
    const int n = m.n;
    const MatrixXd M = control_weight(m);

    // random unit-Frobenius direction
    MatrixXd E(n, n);
    CounterRng rng(seed);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) E(i, j) = rng.normal(1, i, j, 0);
    E /= E.norm();

    const MatrixXd L2inf = *nare.lambda2_inf;
    const MatrixXd L1inf = nare.lambda1_inf;
    const MatrixXd ApG = m.A + m.G;
    const MatrixXd QGam = m.Q * m.Gamma;

    OdeRhs rhs = [&, M, L1inf, ApG, QGam](double, const VectorXd& y, VectorXd& dy) {
        MatrixXd Y = unflatten(y, n, n);
        MatrixXd d = -L1inf * M * Y - Y * M * L1inf - Y * M * Y +
                     (L1inf * m.G + Y * ApG + m.A.transpose() * Y) - QGam;
        dy = flatten(d);
    };

    OdeOptions opts;
    OdeSolution sol = integrate(rhs, 0.0, t_end, flatten((L2inf + delta * E).eval()), opts);

    StabilityProbe p;
    p.diverged = !sol.ok();
    for (size_t k = 0; k < sol.t.size(); ++k) {
        p.t.push_back(sol.t[k]);
        p.distance.push_back((unflatten(sol.y[k], n, n) - L2inf).norm());
    }
    return p;
}

}  // namespace lqmfg
