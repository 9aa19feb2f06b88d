#pragma once

#include <array>

#include "sequest/model.hpp"

namespace sequest::testsupport {

/// Two-hypothesis Bernoulli model with a two-point success probability under
/// each hypothesis. The sufficient statistic is the success count, so every
/// expectation is exactly enumerable over the 2^N observation paths.
struct ToyBernoulliSpec {
    int horizon = 4;
    std::vector<double> hyp_prior{0.5, 0.5};
    std::array<std::array<double, 2>, 2> theta{{{0.20, 0.35}, {0.65, 0.80}}};
    std::array<std::array<double, 2>, 2> weight{{{0.5, 0.5}, {0.5, 0.5}}};
};

class ToyBernoulliModel final : public Model {
public:
    explicit ToyBernoulliModel(ToyBernoulliSpec spec = {});

    std::string name() const override { return "toy-bernoulli"; }
    const HypothesisSet& hypotheses() const override { return hyps_; }
    int statistic_dim() const override { return 1; }
    int horizon() const override { return spec_.horizon; }
    StatisticState initial_state() const override { return {0, 0.0, 0.0}; }
    ObservationDomain observation_domain() const override;

    StatisticState update_statistic(const StatisticState& s, double x) const override;
    PosteriorSummary posterior(const StatisticState& s) const override;
    std::vector<double> log_marginals(const StatisticState& s) const override;
    double conditional_predictive(const StatisticState& s, double x, int m) const override;

    double sample_parameter(int m, RngEngine& rng) const override;
    double sample_observation(int m, double theta, RngEngine& rng) const override;

    /// Grid spanning the reachable success counts 0..N.
    GridSpec statistic_grid() const;

    const ToyBernoulliSpec& spec() const { return spec_; }

    /// sum_i w_i theta_i^k (1 - theta_i)^(n-k), the statistic marginal under H_m.
    double marginal_mass(int m, double k, int n) const;

private:
    ToyBernoulliSpec spec_;
    HypothesisSet hyps_;
};

}  // namespace sequest::testsupport
