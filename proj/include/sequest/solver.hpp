#pragma once

#include <cstdint>

#include "sequest/model.hpp"

namespace sequest {

/// Nonnegative weights (lambda for detection errors, mu for MSEs) that
/// parameterize the unconstrained stopping problem.
struct CostCoefficients {
    std::vector<double> lambda;
    std::vector<double> mu;

    void validate(int M) const;
};

/// Cost functions on the statistic grid for every stage, plus their values at
/// the initial state. rho[n] = min(g[n], d[n]) pointwise, rho[N] = g[N].
struct CostTable {
    GridSpec grid;
    int N = 0;
    std::vector<std::vector<double>> rho;  // n = 0..N
    std::vector<std::vector<double>> d;    // n = 0..N-1
    std::vector<std::vector<double>> g;    // n = 0..N
    double rho0_init = 0.0;
    double d0_init = 0.0;
    double g0_init = 0.0;
};

/// Stop/continue mask, decision map and per-hypothesis estimate map per stage.
struct Policy {
    GridSpec grid;
    int N = 0;
    int M = 0;
    bool min_samples_one = true;
    std::vector<std::vector<std::uint8_t>> stop;    // [n][node]
    std::vector<std::vector<std::int32_t>> decision;  // [n][node], zero-based, valid where stop
    std::vector<std::vector<double>> estimate;      // [n][m * nodes + node]
    std::uint8_t stop_init = 0;
    std::int32_t decision_init = 0;
    std::vector<double> estimate_init;
};

struct SolverOptions {
    /// Force continuation at n = 0 so the run-length is at least one sample.
    bool min_samples_one = true;
    /// Solve half of the statistic grid and mirror (symmetric models only).
    bool exploit_symmetry = false;
    unsigned threads = 0;
};

/// Cost of stopping at a state and deciding each hypothesis (D*).
std::vector<double> stop_costs(const PosteriorSummary& post, const CostCoefficients& c);
std::vector<double> stop_costs(const Model& model, const StatisticState& s,
                               const CostCoefficients& c);

/// Minimum stopping cost and the smallest index attaining it.
std::pair<double, int> stopping_envelope(const PosteriorSummary& post, const CostCoefficients& c);

CostTable backward_induction(const Model& model, const StageTables& tables,
                             const CostCoefficients& coeffs, const SolverOptions& opts = {});

Policy extract_policy(const CostTable& table, const Model& model, const StageTables& tables,
                      const CostCoefficients& coeffs, const SolverOptions& opts = {});

/// Largest pointwise violation of rho = min(g, d); zero for a healthy table.
double bellman_residual(const CostTable& table);

/// Flat node index with the first statistic axis reversed.
std::size_t mirror_flat_index(const GridSpec& grid, std::size_t flat);

}  // namespace sequest
