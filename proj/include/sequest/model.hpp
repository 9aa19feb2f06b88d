#pragma once

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sequest/grid.hpp"

namespace sequest {

using RngEngine = std::mt19937_64;

struct HypothesisSet {
    int count = 0;
    std::vector<double> prior;

    void validate() const;
};

/// Markov state of the scheme: sample count plus the sufficient statistic.
/// t2 is ignored by one-dimensional models.
struct StatisticState {
    int n = 0;
    double t1 = 0.0;
    double t2 = 0.0;
};

struct PosteriorSummary {
    std::vector<double> hyp_probs;
    std::vector<double> param_mean;
    std::vector<double> param_var;
};

/// Observation support used for the continuation-cost quadrature: either a
/// continuous interval (trapezoidal rule) or a finite set of atoms (plain sum).
struct ObservationDomain {
    bool discrete = false;
    GridAxis continuous{};
    std::vector<double> atoms;

    std::vector<double> nodes() const;
    std::vector<double> weights() const;
};

/// Posterior quantities tabulated per (stage, hypothesis, grid node).
/// Built once per design run; immutable afterwards and shared across sweeps.
struct StageTables {
    GridSpec grid;
    int N = 0;
    int M = 0;
    // layout: [n][m][node]
    std::vector<double> log_marg;   // log p(t_n | H_m), common additive constants allowed
    std::vector<double> post_prob;  // p(H_m | t_n), normalized
    std::vector<double> mean;       // E[theta_m | H_m, t_n]
    std::vector<double> var;        // Var[theta_m | H_m, t_n]

    std::size_t nodes() const { return grid.size(); }
    std::size_t offset(int n, int m) const {
        return (static_cast<std::size_t>(n) * static_cast<std::size_t>(M) +
                static_cast<std::size_t>(m)) *
               nodes();
    }
    std::span<const double> slice(const std::vector<double>& a, int n, int m) const {
        return {a.data() + offset(n, m), nodes()};
    }
    std::span<double> slice(std::vector<double>& a, int n, int m) {
        return {a.data() + offset(n, m), nodes()};
    }
};

/// Bayesian sequential model: hypothesis set, sufficient-statistic dynamics and
/// all posterior quantities the solver consumes. All member functions are pure
/// with respect to the model and safe to call concurrently.
class Model {
public:
    virtual ~Model() = default;

    virtual std::string name() const = 0;
    virtual const HypothesisSet& hypotheses() const = 0;
    virtual int statistic_dim() const = 0;
    virtual int horizon() const = 0;
    virtual StatisticState initial_state() const = 0;
    virtual ObservationDomain observation_domain() const = 0;

    /// Advances the sufficient statistic by one observation.
    virtual StatisticState update_statistic(const StatisticState& s, double x) const = 0;

    /// Statistic of a full sample batch, computed from its defining formula
    /// rather than recursively. Default folds update_statistic.
    virtual StatisticState batch_statistic(std::span<const double> xs) const;

    /// Posterior hypothesis probabilities and parameter moments at a state.
    virtual PosteriorSummary posterior(const StatisticState& s) const = 0;

    /// log p(t_n | H_m) for m = 1..M, up to an additive constant shared by all m.
    virtual std::vector<double> log_marginals(const StatisticState& s) const = 0;

    /// p(x | H_m, t_n); hypothesis index is zero-based.
    virtual double conditional_predictive(const StatisticState& s, double x, int m) const = 0;

    /// p(x | t_n) = sum_m p(x | H_m, t_n) p(H_m | t_n).
    double marginal_predictive(const StatisticState& s, double x) const;

    /// Tabulates posterior quantities over a statistic grid for stages 0..N.
    virtual StageTables build_tables(const GridSpec& stat_grid, int N, unsigned threads = 0) const;

    /// Fills out[m * xs.size() + j] = p(x_j | H_m, t_n). Models may evaluate
    /// against cached tables for speed; the default calls the exact predictive.
    virtual void conditional_rows(const StageTables& tables, const StatisticState& s,
                                  std::span<const double> xs, double* out) const;

    /// Batched transition kernel: the statistic reached from s by each x.
    virtual void transition_row(const StatisticState& s, std::span<const double> xs,
                                double* out_t1, double* out_t2) const;

    // Sampling support for Monte Carlo validation (m zero-based).
    virtual double sample_parameter(int m, RngEngine& rng) const = 0;
    virtual double sample_observation(int m, double theta, RngEngine& rng) const = 0;

    // Optional mirror symmetry (statistic axis 0 negated, hypotheses relabeled).
    virtual bool has_mirror_symmetry() const { return false; }
    virtual int mirror_hypothesis(int m) const { return m; }
    virtual double mirror_parameter(int /*m*/, double value) const { return value; }

protected:
    void require_below_horizon(const StatisticState& s) const;
};

void validate_summary(const PosteriorSummary& p, int M);

}  // namespace sequest
