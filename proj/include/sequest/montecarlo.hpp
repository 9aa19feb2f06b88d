#pragma once

#include <cstdint>

#include "sequest/solver.hpp"

namespace sequest {

/// Deterministic per-trajectory stream: the same (seed, index) always yields
/// the same engine state, independent of worker count or scheduling.
RngEngine derive_rng_stream(std::uint64_t master_seed, std::uint64_t index);

/// Empirical detection/estimation errors and run-lengths with uncertainties.
struct EmpiricalReport {
    int M = 0;
    std::uint64_t runs = 0;
    std::uint64_t master_seed = 0;
    std::string hypothesis_mode;  // "prior" or "conditional:<m>"
    std::vector<std::uint64_t> count;  // trajectories per true hypothesis
    std::vector<double> alpha_hat, alpha_se;
    std::vector<double> beta_hat, beta_se;
    std::vector<double> mean_tau;  // per true hypothesis
    double overall_tau = 0.0;
    double overall_tau_se = 0.0;
    double boundary_exit_rate = 0.0;
    /// decision_counts[m][i]: trajectories with true hypothesis m decided as i.
    std::vector<std::vector<std::uint64_t>> decision_counts;
};

/// Per-step scheme execution against a raw (unclamped) trajectory statistic.
class SchemeRunner {
public:
    virtual ~SchemeRunner() = default;

    struct Step {
        bool stop = false;
        int decision = 0;
        double estimate = 0.0;
        bool exited_grid = false;
    };

    /// Consulted for n >= 1; must stop when truncated is true.
    virtual Step step(const StatisticState& s, bool truncated) const = 0;

    /// Stop-at-zero decision, used only when the scheme allows it.
    virtual bool stops_at_initial() const { return false; }
    virtual int initial_decision() const { return 0; }
    virtual double initial_estimate(int /*decision*/) const { return 0.0; }
};

/// Executes a designed grid policy: stop/decision by nearest grid node,
/// estimates by multilinear interpolation.
class GridPolicyRunner final : public SchemeRunner {
public:
    GridPolicyRunner(const Policy& policy, const Model& model);

    Step step(const StatisticState& s, bool truncated) const override;
    bool stops_at_initial() const override;
    int initial_decision() const override { return policy_.decision_init; }
    double initial_estimate(int decision) const override {
        return policy_.estimate_init[static_cast<std::size_t>(decision)];
    }

private:
    const Policy& policy_;
    const Model& model_;
};

enum class HypothesisMode { Prior, Conditional };

EmpiricalReport simulate(const Model& model, const SchemeRunner& runner, std::uint64_t runs,
                         std::uint64_t master_seed, HypothesisMode mode, int fixed_hypothesis = 0,
                         unsigned threads = 0);

}  // namespace sequest
