#include "sequest/ask_invgamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sequest {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

AskSpec default_ask_spec() { return AskSpec{}; }

std::pair<double, double> ask_posterior_params(const AskSpec& spec, const StatisticState& s, int m) {
    const double n = static_cast<double>(s.n);
    const double dx = s.t1 - spec.symbols[static_cast<std::size_t>(m)];
    const double shape = spec.a + 0.5 * n;
    const double scale = spec.b + 0.5 * n * (s.t2 + dx * dx);
    return {shape, scale};
}

AskModel::AskModel(AskSpec spec) : spec_(std::move(spec)) {
    const int M = static_cast<int>(spec_.symbols.size());
    if (M < 2) throw DomainError("ask: need at least two symbols");
    for (int i = 0; i < M; ++i)
        for (int j = i + 1; j < M; ++j)
            if (spec_.symbols[static_cast<std::size_t>(i)] == spec_.symbols[static_cast<std::size_t>(j)])
                throw DomainError("ask: symbols must be pairwise distinct");
    if (!(spec_.a > 2.0)) throw DomainError("ask: prior shape must exceed 2");
    if (!(spec_.b > 0.0)) throw DomainError("ask: prior scale must be positive");
    if (spec_.horizon < 1) throw DomainError("ask: horizon must be at least 1");
    spec_.x_grid.validate();
    if (spec_.hyp_prior.empty())
        spec_.hyp_prior.assign(static_cast<std::size_t>(M), 1.0 / static_cast<double>(M));
    hyps_ = HypothesisSet{M, spec_.hyp_prior};
    hyps_.validate();

    mirror_symmetric_ = true;
    for (int m = 0; m < M; ++m) {
        if (spec_.symbols[static_cast<std::size_t>(m)] !=
                -spec_.symbols[static_cast<std::size_t>(M - 1 - m)] ||
            spec_.hyp_prior[static_cast<std::size_t>(m)] !=
                spec_.hyp_prior[static_cast<std::size_t>(M - 1 - m)])
            mirror_symmetric_ = false;
    }
}

ObservationDomain AskModel::observation_domain() const {
    ObservationDomain d;
    d.discrete = false;
    d.continuous = spec_.x_grid;
    return d;
}

StatisticState AskModel::update_statistic(const StatisticState& s, double x) const {
    require_below_horizon(s);
    const double n = static_cast<double>(s.n);
    const double xbar = (n * s.t1 + x) / (n + 1.0);
    const double sq = (n * (s.t2 + s.t1 * s.t1) + x * x) / (n + 1.0) - xbar * xbar;
    return {s.n + 1, xbar, std::max(0.0, sq)};
}

void AskModel::check_domain(const StatisticState& s) const {
    if (s.n < 0 || s.n > spec_.horizon) throw DomainError("ask: sample count outside 0..N");
    if (!std::isfinite(s.t1) || !std::isfinite(s.t2) || s.t2 < -1e-12)
        throw DomainError("ask: statistic outside the declared domain");
}

PosteriorSummary AskModel::posterior(const StatisticState& s) const {
    check_domain(s);
    const int M = hyps_.count;
    PosteriorSummary out;
    out.hyp_probs.resize(static_cast<std::size_t>(M));
    out.param_mean.resize(static_cast<std::size_t>(M));
    out.param_var.resize(static_cast<std::size_t>(M));
    std::vector<double> lp(static_cast<std::size_t>(M));
    double best = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < M; ++m) {
        const auto [shape, scale] = ask_posterior_params(spec_, s, m);
        out.param_mean[static_cast<std::size_t>(m)] = scale / (shape - 1.0);
        out.param_var[static_cast<std::size_t>(m)] =
            scale * scale / ((shape - 1.0) * (shape - 1.0) * (shape - 2.0));
        lp[static_cast<std::size_t>(m)] =
            std::log(hyps_.prior[static_cast<std::size_t>(m)]) - shape * std::log(scale);
        best = std::max(best, lp[static_cast<std::size_t>(m)]);
    }
    double z = 0.0;
    for (int m = 0; m < M; ++m) {
        out.hyp_probs[static_cast<std::size_t>(m)] = std::exp(lp[static_cast<std::size_t>(m)] - best);
        z += out.hyp_probs[static_cast<std::size_t>(m)];
    }
    for (auto& p : out.hyp_probs) p /= z;
    return out;
}

std::vector<double> AskModel::log_marginals(const StatisticState& s) const {
    check_domain(s);
    const int M = hyps_.count;
    std::vector<double> lm(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        const auto [shape, scale] = ask_posterior_params(spec_, s, m);
        lm[static_cast<std::size_t>(m)] = -shape * std::log(scale);
    }
    return lm;
}

double AskModel::conditional_predictive(const StatisticState& s, double x, int m) const {
    check_domain(s);
    const auto [shape, scale] = ask_posterior_params(spec_, s, m);
    const double shape_x = shape + 0.5;
    const double dx = x - spec_.symbols[static_cast<std::size_t>(m)];
    const double scale_x = scale + 0.5 * dx * dx;
    return std::exp(-0.5 * kLogTwoPi + shape * std::log(scale) - std::lgamma(shape) +
                    std::lgamma(shape_x) - shape_x * std::log(scale_x));
}

void AskModel::conditional_rows(const StageTables& /*tables*/, const StatisticState& s,
                                std::span<const double> xs, double* out) const {
    const int M = hyps_.count;
    const std::size_t nx = xs.size();
    const double shape = spec_.a + 0.5 * static_cast<double>(s.n);
    const double shape_x = shape + 0.5;
    const double lgam = -0.5 * kLogTwoPi - std::lgamma(shape) + std::lgamma(shape_x);
    for (int m = 0; m < M; ++m) {
        const double A = spec_.symbols[static_cast<std::size_t>(m)];
        const double d0 = s.t1 - A;
        const double scale = spec_.b + 0.5 * static_cast<double>(s.n) * (s.t2 + d0 * d0);
        const double c = lgam + shape * fast_log(scale);
        double* row = out + static_cast<std::size_t>(m) * nx;
        for (std::size_t j = 0; j < nx; ++j) {
            const double dx = xs[j] - A;
            row[j] = fast_exp(c - shape_x * fast_log(scale + 0.5 * dx * dx));
        }
    }
}

void AskModel::transition_row(const StatisticState& s, std::span<const double> xs, double* out_t1,
                              double* out_t2) const {
    const double n = static_cast<double>(s.n);
    const double inv = 1.0 / (n + 1.0);
    const double base1 = n * s.t1 * inv;
    const double base2 = n * (s.t2 + s.t1 * s.t1) * inv;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double xbar = base1 + xs[j] * inv;
        const double sq = base2 + xs[j] * xs[j] * inv - xbar * xbar;
        out_t1[j] = xbar;
        out_t2[j] = sq > 0.0 ? sq : 0.0;
    }
}

double AskModel::sample_parameter(int /*m*/, RngEngine& rng) const {
    std::gamma_distribution<double> g(spec_.a, 1.0 / spec_.b);
    double y = g(rng);
    while (!(y > 0.0)) y = g(rng);
    return 1.0 / y;
}

double AskModel::sample_observation(int m, double theta, RngEngine& rng) const {
    std::normal_distribution<double> d(spec_.symbols[static_cast<std::size_t>(m)], std::sqrt(theta));
    return d(rng);
}

}  // namespace sequest
