#pragma once

#include "sequest/model.hpp"

namespace sequest {

/// Three-hypothesis Gaussian shift-in-mean model. The mean is distributed as a
/// mirrored, offset Gamma under hypotheses 1 and 3 and uniformly under
/// hypothesis 2; posteriors are computed by trapezoidal quadrature over a
/// fixed mean grid.
struct ShiftInMeanSpec {
    double sigma2 = 4.0;
    GridAxis mu_grid{-16.0, 16.0, 7000};
    GridAxis x_grid{-15.0, 15.0, 6000};
    double stat_lo = -8.0;
    double stat_hi = 8.0;
    int horizon = 100;
    std::vector<double> hyp_prior{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

    // Mean priors: mu_1 = offset - G, mu_3 = offset + G with G ~ Gam(shape, scale),
    // mu_2 ~ U(uniform_lo, uniform_hi).
    double gamma_shape = 1.7;
    double gamma_scale = 1.0;
    double gamma_offset = 1.3;
    double uniform_lo = -1.0;
    double uniform_hi = 1.0;

    /// Per-hypothesis prior density of the mean tabulated on mu_grid.
    /// Filled from the parametric fields when left empty.
    std::vector<std::vector<double>> prior_density;
};

ShiftInMeanSpec default_shift_in_mean_spec();

class ShiftInMeanModel final : public Model {
public:
    explicit ShiftInMeanModel(ShiftInMeanSpec spec);

    std::string name() const override { return "shift-in-mean"; }
    const HypothesisSet& hypotheses() const override { return hyps_; }
    int statistic_dim() const override { return 1; }
    int horizon() const override { return spec_.horizon; }
    StatisticState initial_state() const override { return {0, 0.0, 0.0}; }
    ObservationDomain observation_domain() const override;

    StatisticState update_statistic(const StatisticState& s, double x) const override;
    PosteriorSummary posterior(const StatisticState& s) const override;
    std::vector<double> log_marginals(const StatisticState& s) const override;
    double conditional_predictive(const StatisticState& s, double x, int m) const override;

    StageTables build_tables(const GridSpec& stat_grid, int N, unsigned threads) const override;
    void conditional_rows(const StageTables& tables, const StatisticState& s,
                          std::span<const double> xs, double* out) const override;
    void transition_row(const StatisticState& s, std::span<const double> xs, double* out_t1,
                        double* out_t2) const override;

    double sample_parameter(int m, RngEngine& rng) const override;
    double sample_observation(int m, double theta, RngEngine& rng) const override;

    bool has_mirror_symmetry() const override { return mirror_symmetric_; }
    int mirror_hypothesis(int m) const override { return mirror_symmetric_ ? 2 - m : m; }
    double mirror_parameter(int /*m*/, double value) const override {
        return mirror_symmetric_ ? -value : value;
    }

    const ShiftInMeanSpec& spec() const { return spec_; }
    /// Tabulated and renormalized prior density of the mean under H_m.
    const std::vector<double>& prior_density(int m) const {
        return spec_.prior_density[static_cast<std::size_t>(m)];
    }

private:
    struct Analysis {
        std::vector<double> log_marg, probs, mean, var;
    };
    Analysis analyze(const StatisticState& s, bool want_moments) const;
    void check_domain(const StatisticState& s) const;

    ShiftInMeanSpec spec_;
    HypothesisSet hyps_;
    bool mirror_symmetric_ = false;
    // Quadrature tables over the mean grid.
    std::vector<double> mu_nodes_;
    std::vector<double> mu_weights_;
    std::vector<std::vector<double>> log_weighted_prior_;  // log(density * weight) per hypothesis
    std::vector<std::pair<int, int>> support_;             // inclusive node index range per hypothesis
    std::vector<double> prior_mean_, prior_var_;
};

}  // namespace sequest
