#include "lqmfg/simulate.hpp"

#include "lqmfg/rng.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace lqmfg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Deterministic pairwise (binary-tree) accumulator: merge order depends only
// on the push index, so reductions are bit-reproducible.
template <class T>
class PairwiseAcc {
  public:
    void push(T x)
    {
        std::size_t level = 0;
        while (level < filled_.size() && filled_[level]) {
            x = slots_[level] + x;
            filled_[level] = false;
            ++level;
        }
        if (level == filled_.size()) {
            filled_.push_back(true);
            slots_.push_back(std::move(x));
        } else {
            slots_[level] = std::move(x);
            filled_[level] = true;
        }
    }
    T total(const T& zero) const
    {
        T acc = zero;
        for (std::size_t l = 0; l < filled_.size(); ++l)
            if (filled_[l]) acc = acc + slots_[l];
        return acc;
    }

  private:
    std::vector<T> slots_;
    std::vector<bool> filled_;
};

// counter layout: w0 = member, w1 = player, w2 = step, w3 = pair | domain<<16
constexpr std::uint32_t kNoiseDomain = 0u;
constexpr std::uint32_t kInitDomain = 1u << 16;

VectorXd draw_normals(const CounterRng& rng, int count, std::uint32_t member, std::uint32_t player,
                      std::uint32_t step, std::uint32_t domain)
{
    VectorXd z(count);
    for (int c = 0; c < count; c += 2) {
        auto [z0, z1] = rng.normal_pair(member, player, step, domain | (std::uint32_t)(c / 2));
        z[c] = z0;
        if (c + 1 < count) z[c + 1] = z1;
    }
    return z;
}

}  // namespace

InitialLaw InitialLaw::all_equal(const Eigen::VectorXd& x, int N)
{
    InitialLaw law;
    law.kind = Kind::deterministic;
    law.values.assign(N, x);
    return law;
}

InitialLaw InitialLaw::gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov)
{
    InitialLaw law;
    law.kind = Kind::gaussian;
    law.mean = mean;
    law.cov = cov;
    return law;
}

StrategyProfile StrategyProfile::exact_nash(const ReducedBlocks& blocks)
{
    StrategyProfile p{Kind::exact_nash, blocks.pi1, blocks.pi2, blocks.theta1, {}, {}};
    return p;
}

StrategyProfile StrategyProfile::direct_decentralized(const LimitSolution& limit)
{
    StrategyProfile p{Kind::direct_decentralized, limit.lambda1, {}, limit.chi1, limit.lambda2,
                      limit.xbar};
    return p;
}

StrategyProfile StrategyProfile::fixed_point(const MatrixPath& lambda1, const MatrixPath& s)
{
    StrategyProfile p{Kind::fixed_point, lambda1, {}, s, {}, {}};
    return p;
}

std::string to_string(StrategyProfile::Kind k)
{
    switch (k) {
        case StrategyProfile::Kind::exact_nash: return "exact_nash";
        case StrategyProfile::Kind::direct_decentralized: return "direct_decentralized";
        case StrategyProfile::Kind::fixed_point: return "fixed_point";
    }
    return "?";
}

double pairwise_sum(const std::vector<double>& v)
{
    PairwiseAcc<double> acc;
    for (double x : v) acc.push(x);
    return acc.total(0.0);
}

EnsembleStats simulate_ensemble(const GameModel& m, const SimConfig& config,
                                const StrategyProfile& profile, const MatrixPath& xbar_ref)
{
    const int N = config.N, n = m.n;
    if (N < 1 || config.paths < 1) throw std::invalid_argument("simulation needs N, paths >= 1");
    if (!(config.dt > 0)) throw std::invalid_argument("dt must be positive");
    const double steps_real = m.T / config.dt;
    const long K = (long)std::llround(steps_real);
    if (std::abs((double)K * config.dt - m.T) > 1e-12 * std::max(1.0, m.T))
        throw std::invalid_argument("dt does not divide T");

    if (config.initial_law.kind == InitialLaw::Kind::deterministic &&
        (int)config.initial_law.values.size() != N)
        throw std::invalid_argument("initial law needs one starting point per player");

    Eigen::LLT<MatrixXd> Rllt(m.R);
    const MatrixXd RinvBt = Rllt.solve(m.B.transpose());
    MatrixXd cov_chol;
    if (config.initial_law.kind == InitialLaw::Kind::gaussian) {
        Eigen::LLT<MatrixXd> llt(config.initial_law.cov +
                                 1e-14 * MatrixXd::Identity(n, n));
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("initial covariance not positive semi-definite");
        cov_chol = llt.matrixL();
    }

    const CounterRng rng(config.seed);
    const double sqdt = std::sqrt(config.dt);

    EnsembleStats stats;
    stats.t.resize(K + 1);
    for (long k = 0; k <= K; ++k) stats.t[k] = std::min((double)k * config.dt, m.T);

    // per-step coefficient tables, shared by every member and player
    std::vector<MatrixXd> own(K + 1), other(K + 1);
    std::vector<VectorXd> common(K + 1);
    for (long k = 0; k <= K; ++k) {
        const double t = stats.t[k];
        own[k] = profile.own_gain.eval(t);
        switch (profile.kind) {
            case StrategyProfile::Kind::exact_nash:
                other[k] = profile.other_gain.eval(t);
                common[k] = profile.offset.eval(t);
                break;
            case StrategyProfile::Kind::direct_decentralized:
                common[k] = profile.mean_weight->eval(t) * profile.mean_path->eval(t) +
                            profile.offset.eval(t);
                break;
            case StrategyProfile::Kind::fixed_point:
                common[k] = profile.offset.eval(t);
                break;
        }
    }
    std::vector<VectorXd> xbar_tab(K + 1);
    for (long k = 0; k <= K; ++k) xbar_tab[k] = xbar_ref.eval(stats.t[k]);

    std::vector<PairwiseAcc<VectorXd>> mean_acc(K + 1);
    std::vector<PairwiseAcc<double>> mse_acc(K + 1);
    std::vector<PairwiseAcc<double>> cost_acc(N), cost_sq_acc(N);

    std::vector<VectorXd> X(N), U(N);
    std::vector<double> run_cost(N), prev_integrand(N);

    for (int member = 0; member < config.paths; ++member) {
        // initial states
        for (int i = 0; i < N; ++i) {
            if (config.initial_law.kind == InitialLaw::Kind::deterministic)
                X[i] = config.initial_law.values[i];
            else
                X[i] = config.initial_law.mean +
                       cov_chol * draw_normals(rng, n, member, i, 0, kInitDomain);
            run_cost[i] = 0.0;
        }

        for (long k = 0; k <= K; ++k) {
            VectorXd sum = VectorXd::Zero(n);
            for (int i = 0; i < N; ++i) sum += X[i];
            const VectorXd pop_avg = sum / N;

            mean_acc[k].push(pop_avg);
            mse_acc[k].push((pop_avg - xbar_tab[k]).squaredNorm());

            // controls at the left endpoint of the step
            for (int i = 0; i < N; ++i) {
                VectorXd arg;
                switch (profile.kind) {
                    case StrategyProfile::Kind::exact_nash:
                        arg = own[k] * X[i] + other[k] * (sum - X[i]) + common[k];
                        break;
                    case StrategyProfile::Kind::direct_decentralized:
                    case StrategyProfile::Kind::fixed_point:
                        arg = own[k] * X[i] + common[k];
                        break;
                }
                U[i] = -RinvBt * arg;
            }

            // trapezoidal running cost
            for (int i = 0; i < N; ++i) {
                const VectorXd dev = X[i] - m.Gamma * pop_avg - m.eta;
                const double integrand = dev.dot(m.Q * dev) + U[i].dot(m.R * U[i]);
                if (k > 0) run_cost[i] += 0.5 * config.dt * (prev_integrand[i] + integrand);
                prev_integrand[i] = integrand;
            }

            if (k == K) {
                for (int i = 0; i < N; ++i) {
                    const VectorXd devf = X[i] - m.Gammaf * pop_avg - m.etaf;
                    const double total = run_cost[i] + devf.dot(m.Qf * devf);
                    cost_acc[i].push(total);
                    cost_sq_acc[i].push(total * total);
                }
                break;
            }

            // Euler-Maruyama update
            for (int i = 0; i < N; ++i) {
                const VectorXd noise =
                    m.D * draw_normals(rng, m.n2, member, i, (std::uint32_t)k, kNoiseDomain);
                X[i] += config.dt * (m.A * X[i] + m.B * U[i] + m.G * pop_avg) + sqdt * noise;
            }
        }
    }

    const double P = config.paths;
    stats.mean_pop_avg.resize(K + 1);
    stats.mse_path.resize(K + 1);
    for (long k = 0; k <= K; ++k) {
        stats.mean_pop_avg[k] = mean_acc[k].total(VectorXd::Zero(n)) / P;
        stats.mse_path[k] = mse_acc[k].total(0.0) / P;
        stats.mse_vs_xbar = std::max(stats.mse_vs_xbar, stats.mse_path[k]);
    }
    stats.costs.resize(N);
    for (int i = 0; i < N; ++i) {
        const double s1 = cost_acc[i].total(0.0), s2 = cost_sq_acc[i].total(0.0);
        stats.costs[i].mean = s1 / P;
        const double var = (P > 1) ? std::max(0.0, (s2 - s1 * s1 / P) / (P - 1)) : 0.0;
        stats.costs[i].std_error = std::sqrt(var / P);
    }
    return stats;
}

double evaluate_cost(const GameModel& m, const std::vector<double>& t,
                     const std::vector<Eigen::VectorXd>& player_path,
                     const std::vector<Eigen::VectorXd>& pop_avg_path,
                     const std::vector<Eigen::VectorXd>& control_path)
{
    const std::size_t K = t.size();
    if (player_path.size() != K || pop_avg_path.size() != K || control_path.size() != K)
        throw std::invalid_argument("cost evaluation needs paths on a common grid");
    double acc = 0, prev = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const VectorXd dev = player_path[k] - m.Gamma * pop_avg_path[k] - m.eta;
        const double f = dev.dot(m.Q * dev) + control_path[k].dot(m.R * control_path[k]);
        if (k > 0) acc += 0.5 * (t[k] - t[k - 1]) * (prev + f);
        prev = f;
    }
    const VectorXd devf = player_path[K - 1] - m.Gammaf * pop_avg_path[K - 1] - m.etaf;
    return acc + devf.dot(m.Qf * devf);
}

}  // namespace lqmfg
