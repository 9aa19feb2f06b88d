#include "sequest/montecarlo.hpp"

#include <algorithm>
#include <cmath>

namespace sequest {

namespace {

constexpr std::uint64_t kBlockSize = 4096;

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Per-(true hypothesis) accumulators for one block of trajectories.
struct BlockAccum {
    std::vector<std::uint64_t> count, wrong, exits;
    std::vector<double> beta_sum, beta_sq, tau_sum;
    std::vector<std::uint64_t> decisions;  // M x M
    double tau_total = 0.0, tau_total_sq = 0.0;

    explicit BlockAccum(int M)
        : count(static_cast<std::size_t>(M), 0),
          wrong(static_cast<std::size_t>(M), 0),
          exits(static_cast<std::size_t>(M), 0),
          beta_sum(static_cast<std::size_t>(M), 0.0),
          beta_sq(static_cast<std::size_t>(M), 0.0),
          tau_sum(static_cast<std::size_t>(M), 0.0),
          decisions(static_cast<std::size_t>(M) * static_cast<std::size_t>(M), 0) {}
};

}  // namespace

RngEngine derive_rng_stream(std::uint64_t master_seed, std::uint64_t index) {
    const std::uint64_t seed = splitmix64(splitmix64(master_seed) ^ splitmix64(index + 1));
    return RngEngine(seed);
}

GridPolicyRunner::GridPolicyRunner(const Policy& policy, const Model& model)
    : policy_(policy), model_(model) {}

bool GridPolicyRunner::stops_at_initial() const {
    return !policy_.min_samples_one && policy_.stop_init != 0;
}

SchemeRunner::Step GridPolicyRunner::step(const StatisticState& s, bool truncated) const {
    Step out;
    const auto& grid = policy_.grid;
    const std::size_t nodes = grid.size();

    double t1 = s.t1, t2 = s.t2;
    const auto& ax = grid.axes[0];
    if (t1 < ax.lo || t1 > ax.hi) {
        out.exited_grid = true;
        t1 = std::clamp(t1, ax.lo, ax.hi);
    }
    std::size_t node;
    int i0 = static_cast<int>(std::lround((t1 - ax.lo) / ax.step()));
    i0 = std::clamp(i0, 0, ax.count - 1);
    if (grid.dim() == 2) {
        const auto& ay = grid.axes[1];
        if (t2 < ay.lo || t2 > ay.hi) {
            out.exited_grid = true;
            t2 = std::clamp(t2, ay.lo, ay.hi);
        }
        int i1 = static_cast<int>(std::lround((t2 - ay.lo) / ay.step()));
        i1 = std::clamp(i1, 0, ay.count - 1);
        node = grid.flat_index(i0, i1);
    } else {
        node = grid.flat_index(i0);
    }

    const auto& stop = policy_.stop[static_cast<std::size_t>(s.n)];
    out.stop = truncated || stop[node] != 0;
    if (!out.stop) return out;

    out.decision = policy_.decision[static_cast<std::size_t>(s.n)][node];
    const auto& est = policy_.estimate[static_cast<std::size_t>(s.n)];
    const double* field = est.data() + static_cast<std::size_t>(out.decision) * nodes;
    if (grid.dim() == 1) {
        const auto [k, a] = ax.locate(t1);
        out.estimate = (1.0 - a) * field[static_cast<std::size_t>(k)] +
                       a * field[static_cast<std::size_t>(k) + 1];
    } else {
        const auto& ay = grid.axes[1];
        const auto [kx, a] = ax.locate(t1);
        const auto [ky, b] = ay.locate(t2);
        const std::size_t n1 = static_cast<std::size_t>(ay.count);
        const std::size_t base = static_cast<std::size_t>(kx) * n1 + static_cast<std::size_t>(ky);
        out.estimate = (1.0 - a) * ((1.0 - b) * field[base] + b * field[base + 1]) +
                       a * ((1.0 - b) * field[base + n1] + b * field[base + n1 + 1]);
    }
    return out;
}

EmpiricalReport simulate(const Model& model, const SchemeRunner& runner, std::uint64_t runs,
                         std::uint64_t master_seed, HypothesisMode mode, int fixed_hypothesis,
                         unsigned threads) {
    if (runs < 1) throw DomainError("simulate: need at least one run");
    const int M = model.hypotheses().count;
    const int N = model.horizon();
    const auto& prior = model.hypotheses().prior;
    if (mode == HypothesisMode::Conditional && (fixed_hypothesis < 0 || fixed_hypothesis >= M))
        throw DomainError("simulate: fixed hypothesis out of range");

    const std::uint64_t blocks = (runs + kBlockSize - 1) / kBlockSize;
    std::vector<BlockAccum> acc(blocks, BlockAccum(M));

    parallel_for(blocks, threads, [&](std::size_t bb, std::size_t be) {
        for (std::size_t blk = bb; blk < be; ++blk) {
            auto& a = acc[blk];
            const std::uint64_t lo = static_cast<std::uint64_t>(blk) * kBlockSize;
            const std::uint64_t hi = std::min(runs, lo + kBlockSize);
            for (std::uint64_t idx = lo; idx < hi; ++idx) {
                RngEngine rng = derive_rng_stream(master_seed, idx);
                int m = fixed_hypothesis;
                if (mode == HypothesisMode::Prior) {
                    std::uniform_real_distribution<double> u(0.0, 1.0);
                    double v = u(rng);
                    m = M - 1;
                    double c = 0.0;
                    for (int i = 0; i < M; ++i) {
                        c += prior[static_cast<std::size_t>(i)];
                        if (v < c) {
                            m = i;
                            break;
                        }
                    }
                }
                const double theta = model.sample_parameter(m, rng);

                StatisticState s = model.initial_state();
                int tau = 0;
                int decision = 0;
                double estimate = 0.0;
                bool exited = false;
                if (runner.stops_at_initial()) {
                    decision = runner.initial_decision();
                    estimate = runner.initial_estimate(decision);
                } else {
                    for (int n = 1; n <= N; ++n) {
                        const double x = model.sample_observation(m, theta, rng);
                        s = model.update_statistic(s, x);
                        const auto step = runner.step(s, n == N);
                        exited = exited || step.exited_grid;
                        if (step.stop) {
                            tau = n;
                            decision = step.decision;
                            estimate = step.estimate;
                            break;
                        }
                    }
                }

                const auto mu = static_cast<std::size_t>(m);
                a.count[mu] += 1;
                a.tau_sum[mu] += tau;
                a.tau_total += tau;
                a.tau_total_sq += static_cast<double>(tau) * tau;
                a.decisions[mu * static_cast<std::size_t>(M) + static_cast<std::size_t>(decision)] += 1;
                if (decision != m) {
                    a.wrong[mu] += 1;
                } else {
                    const double err = theta - estimate;
                    a.beta_sum[mu] += err * err;
                    a.beta_sq[mu] += err * err * err * err;
                }
                if (exited) a.exits[mu] += 1;
            }
        }
    });

    // Sequential combine over blocks keeps the result identical for any
    // worker count.
    EmpiricalReport rep;
    rep.M = M;
    rep.runs = runs;
    rep.master_seed = master_seed;
    rep.hypothesis_mode = mode == HypothesisMode::Prior
                              ? std::string("prior")
                              : "conditional:" + std::to_string(fixed_hypothesis + 1);
    rep.count.assign(static_cast<std::size_t>(M), 0);
    rep.alpha_hat.assign(static_cast<std::size_t>(M), 0.0);
    rep.alpha_se.assign(static_cast<std::size_t>(M), 0.0);
    rep.beta_hat.assign(static_cast<std::size_t>(M), 0.0);
    rep.beta_se.assign(static_cast<std::size_t>(M), 0.0);
    rep.mean_tau.assign(static_cast<std::size_t>(M), 0.0);
    rep.decision_counts.assign(static_cast<std::size_t>(M),
                               std::vector<std::uint64_t>(static_cast<std::size_t>(M), 0));

    std::vector<std::uint64_t> wrong(static_cast<std::size_t>(M), 0), exits(static_cast<std::size_t>(M), 0);
    std::vector<double> beta_sum(static_cast<std::size_t>(M), 0.0), beta_sq(static_cast<std::size_t>(M), 0.0);
    std::vector<double> tau_sum(static_cast<std::size_t>(M), 0.0);
    double tau_total = 0.0, tau_total_sq = 0.0;
    for (const auto& a : acc) {
        for (int m = 0; m < M; ++m) {
            const auto mu = static_cast<std::size_t>(m);
            rep.count[mu] += a.count[mu];
            wrong[mu] += a.wrong[mu];
            exits[mu] += a.exits[mu];
            beta_sum[mu] += a.beta_sum[mu];
            beta_sq[mu] += a.beta_sq[mu];
            tau_sum[mu] += a.tau_sum[mu];
            for (int i = 0; i < M; ++i)
                rep.decision_counts[mu][static_cast<std::size_t>(i)] +=
                    a.decisions[mu * static_cast<std::size_t>(M) + static_cast<std::size_t>(i)];
        }
        tau_total += a.tau_total;
        tau_total_sq += a.tau_total_sq;
    }

    std::uint64_t total_exits = 0;
    for (int m = 0; m < M; ++m) {
        const auto mu = static_cast<std::size_t>(m);
        const double c = static_cast<double>(rep.count[mu]);
        total_exits += exits[mu];
        if (rep.count[mu] == 0) continue;
        const double alpha = static_cast<double>(wrong[mu]) / c;
        rep.alpha_hat[mu] = alpha;
        rep.alpha_se[mu] = std::sqrt(std::max(0.0, alpha * (1.0 - alpha) / c));
        const double beta = beta_sum[mu] / c;
        rep.beta_hat[mu] = beta;
        rep.beta_se[mu] = std::sqrt(std::max(0.0, (beta_sq[mu] / c - beta * beta) / c));
        rep.mean_tau[mu] = tau_sum[mu] / c;
    }
    const double r = static_cast<double>(runs);
    rep.overall_tau = tau_total / r;
    rep.overall_tau_se =
        std::sqrt(std::max(0.0, (tau_total_sq / r - rep.overall_tau * rep.overall_tau) / r));
    rep.boundary_exit_rate = static_cast<double>(total_exits) / r;
    return rep;
}

}  // namespace sequest
