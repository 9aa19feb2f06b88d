#pragma once

#include "sequest/model.hpp"

namespace sequest {

/// ASK decoding with unknown noise power. The noise variance carries a
/// conjugate inverse-Gamma prior, so every posterior quantity is closed form.
struct AskSpec {
    std::vector<double> symbols{-2.0, -1.0, 1.0, 2.0};
    double a = 2.1;  // prior shape, > 2 so the variance exists at n = 0
    double b = 0.9;  // prior scale
    int horizon = 50;
    GridAxis x_grid{-25.0, 25.0, 2100};
    std::vector<double> hyp_prior;  // equal when empty
};

AskSpec default_ask_spec();

/// Posterior shape/scale of the noise power under hypothesis m (zero-based).
std::pair<double, double> ask_posterior_params(const AskSpec& spec, const StatisticState& s, int m);

class AskModel final : public Model {
public:
    explicit AskModel(AskSpec spec);

    std::string name() const override { return "ask"; }
    const HypothesisSet& hypotheses() const override { return hyps_; }
    int statistic_dim() const override { return 2; }
    int horizon() const override { return spec_.horizon; }
    StatisticState initial_state() const override { return {0, 0.0, 0.0}; }
    ObservationDomain observation_domain() const override;

    StatisticState update_statistic(const StatisticState& s, double x) const override;
    PosteriorSummary posterior(const StatisticState& s) const override;
    std::vector<double> log_marginals(const StatisticState& s) const override;
    double conditional_predictive(const StatisticState& s, double x, int m) const override;

    void conditional_rows(const StageTables& tables, const StatisticState& s,
                          std::span<const double> xs, double* out) const override;
    void transition_row(const StatisticState& s, std::span<const double> xs, double* out_t1,
                        double* out_t2) const override;

    double sample_parameter(int m, RngEngine& rng) const override;
    double sample_observation(int m, double theta, RngEngine& rng) const override;

    bool has_mirror_symmetry() const override { return mirror_symmetric_; }
    int mirror_hypothesis(int m) const override {
        return mirror_symmetric_ ? hyps_.count - 1 - m : m;
    }

    const AskSpec& spec() const { return spec_; }

private:
    void check_domain(const StatisticState& s) const;

    AskSpec spec_;
    HypothesisSet hyps_;
    bool mirror_symmetric_ = false;
};

}  // namespace sequest
