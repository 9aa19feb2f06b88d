#pragma once

#include "sequest/montecarlo.hpp"

namespace sequest {

/// Matrix SPRT with constant per-row thresholds, truncated at N.
struct MsprtConfig {
    std::vector<double> thresholds;  // A_m
    int N = 0;

    void validate(int M) const;
};

/// A_m = log(M / alpha_bar_m).
std::vector<double> msprt_thresholds(int M, const std::vector<double>& alpha_bar);

struct MsprtStep {
    bool stop = false;
    int decision = 0;  // zero-based, valid when stop
};

/// One stopping/decision evaluation from the pairwise log-likelihood ratios
/// eta[m][j] = log p(t|H_m) - log p(t|H_j). At the truncation point the
/// decision maximizes the summed LLRs. Ties break to the smallest index.
MsprtStep msprt_step(const std::vector<double>& log_marginals, const MsprtConfig& config,
                     bool truncated);

/// Two-step benchmark: MSPRT detector followed by the MMSE estimator at the
/// stopping state. Log-marginals are interpolated from the stage tables when
/// provided (statistic clamped to the grid), otherwise evaluated exactly.
class MsprtRunner final : public SchemeRunner {
public:
    MsprtRunner(const Model& model, MsprtConfig config, const StageTables* tables = nullptr);

    Step step(const StatisticState& s, bool truncated) const override;

    /// Posterior-mean estimate under the accepted hypothesis.
    double estimate_at(const StatisticState& s, int decision) const;

private:
    std::vector<double> log_marginals_at(const StatisticState& s) const;

    const Model& model_;
    MsprtConfig config_;
    const StageTables* tables_;
};

}  // namespace sequest
