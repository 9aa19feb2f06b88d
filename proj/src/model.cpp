#include "sequest/model.hpp"

#include <cmath>

namespace sequest {

void HypothesisSet::validate() const {
    if (count < 2) throw DomainError("hypothesis set: need at least two hypotheses");
    if (static_cast<int>(prior.size()) != count)
        throw DomainError("hypothesis set: prior length does not match hypothesis count");
    double s = 0.0;
    for (double p : prior) {
        if (!(p > 0.0)) throw DomainError("hypothesis set: priors must be strictly positive");
        s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw DomainError("hypothesis set: priors must sum to one");
}

std::vector<double> ObservationDomain::nodes() const {
    if (discrete) return atoms;
    std::vector<double> xs(static_cast<std::size_t>(continuous.count));
    for (int j = 0; j < continuous.count; ++j) xs[static_cast<std::size_t>(j)] = continuous.node(j);
    return xs;
}

std::vector<double> ObservationDomain::weights() const {
    if (discrete) return std::vector<double>(atoms.size(), 1.0);
    return trapezoid_weights(continuous);
}

void validate_summary(const PosteriorSummary& p, int M) {
    const auto m = static_cast<std::size_t>(M);
    if (p.hyp_probs.size() != m || p.param_mean.size() != m || p.param_var.size() != m)
        throw DomainError("posterior summary: field lengths do not match hypothesis count");
    double s = 0.0;
    for (double q : p.hyp_probs) {
        if (!(q >= 0.0) || q > 1.0 + 1e-12) throw DomainError("posterior summary: probabilities outside [0,1]");
        s += q;
    }
    if (std::abs(s - 1.0) > 1e-10) throw DomainError("posterior summary: probabilities do not sum to one");
    for (double v : p.param_var)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw DomainError("posterior summary: variances must be finite and nonnegative");
}

double Model::marginal_predictive(const StatisticState& s, double x) const {
    const auto post = posterior(s);
    double acc = 0.0;
    for (int m = 0; m < hypotheses().count; ++m)
        acc += post.hyp_probs[static_cast<std::size_t>(m)] * conditional_predictive(s, x, m);
    return acc;
}

StageTables Model::build_tables(const GridSpec& stat_grid, int N, unsigned threads) const {
    stat_grid.validate();
    if (N < 1) throw DomainError("stage tables: horizon must be at least 1");
    StageTables T;
    T.grid = stat_grid;
    T.N = N;
    T.M = hypotheses().count;
    const std::size_t nodes = T.nodes();
    const std::size_t total = static_cast<std::size_t>(N + 1) * static_cast<std::size_t>(T.M) * nodes;
    T.log_marg.assign(total, 0.0);
    T.post_prob.assign(total, 0.0);
    T.mean.assign(total, 0.0);
    T.var.assign(total, 0.0);

    for (int n = 0; n <= N; ++n) {
        parallel_for(nodes, threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto pt = stat_grid.point(i);
                StatisticState s{n, pt[0], pt[1]};
                const auto post = posterior(s);
                const auto lm = log_marginals(s);
                for (int m = 0; m < T.M; ++m) {
                    const std::size_t off = T.offset(n, m) + i;
                    T.log_marg[off] = lm[static_cast<std::size_t>(m)];
                    T.post_prob[off] = post.hyp_probs[static_cast<std::size_t>(m)];
                    T.mean[off] = post.param_mean[static_cast<std::size_t>(m)];
                    T.var[off] = post.param_var[static_cast<std::size_t>(m)];
                }
            }
        });
    }
    return T;
}

void Model::conditional_rows(const StageTables& /*tables*/, const StatisticState& s,
                             std::span<const double> xs, double* out) const {
    const int M = hypotheses().count;
    for (int m = 0; m < M; ++m)
        for (std::size_t j = 0; j < xs.size(); ++j)
            out[static_cast<std::size_t>(m) * xs.size() + j] = conditional_predictive(s, xs[j], m);
}

void Model::transition_row(const StatisticState& s, std::span<const double> xs, double* out_t1,
                           double* out_t2) const {
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const auto next = update_statistic(s, xs[j]);
        out_t1[j] = next.t1;
        out_t2[j] = next.t2;
    }
}

void Model::require_below_horizon(const StatisticState& s) const {
    if (s.n >= horizon())
        throw HorizonError("update_statistic: state is already at the truncation horizon");
    if (s.n < 0) throw DomainError("state: negative sample count");
}

}  // namespace sequest
