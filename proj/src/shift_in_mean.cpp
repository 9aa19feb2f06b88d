#include "sequest/shift_in_mean.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sequest {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;
// Quadrature window half-width in posterior standard deviations; the dropped
// tail is below exp(-40) of the peak.
constexpr double kWindowSigmas = 9.0;
constexpr double kUnderflowLog = -690.77552789821368;  // log(1e-300)

double log_gamma_pdf(double y, double shape, double scale) {
    if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
    const double z = y / scale;
    return (shape - 1.0) * std::log(z) - z - std::lgamma(shape) - std::log(scale);
}

}  // namespace

ShiftInMeanSpec default_shift_in_mean_spec() { return ShiftInMeanSpec{}; }

ShiftInMeanModel::ShiftInMeanModel(ShiftInMeanSpec spec) : spec_(std::move(spec)) {
    if (!(spec_.sigma2 > 0.0)) throw DomainError("shift-in-mean: sigma2 must be positive");
    if (spec_.horizon < 1) throw DomainError("shift-in-mean: horizon must be at least 1");
    spec_.mu_grid.validate();
    spec_.x_grid.validate();
    hyps_ = HypothesisSet{3, spec_.hyp_prior};
    hyps_.validate();

    const int K = spec_.mu_grid.count;
    mu_nodes_.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) mu_nodes_[static_cast<std::size_t>(k)] = spec_.mu_grid.node(k);
    mu_weights_ = trapezoid_weights(spec_.mu_grid);

    if (spec_.prior_density.empty()) {
        spec_.prior_density.assign(3, std::vector<double>(static_cast<std::size_t>(K), 0.0));
        for (int k = 0; k < K; ++k) {
            const double mu = mu_nodes_[static_cast<std::size_t>(k)];
            spec_.prior_density[0][static_cast<std::size_t>(k)] = std::exp(
                log_gamma_pdf(spec_.gamma_offset - mu, spec_.gamma_shape, spec_.gamma_scale));
            spec_.prior_density[1][static_cast<std::size_t>(k)] =
                (mu >= spec_.uniform_lo && mu < spec_.uniform_hi)
                    ? 1.0 / (spec_.uniform_hi - spec_.uniform_lo)
                    : 0.0;
            spec_.prior_density[2][static_cast<std::size_t>(k)] = std::exp(
                log_gamma_pdf(mu - spec_.gamma_offset, spec_.gamma_shape, spec_.gamma_scale));
        }
    }
    if (spec_.prior_density.size() != 3)
        throw DomainError("shift-in-mean: need one prior density per hypothesis");

    log_weighted_prior_.assign(3, std::vector<double>(static_cast<std::size_t>(K),
                                                      -std::numeric_limits<double>::infinity()));
    support_.assign(3, {0, -1});
    prior_mean_.assign(3, 0.0);
    prior_var_.assign(3, 0.0);
    for (int m = 0; m < 3; ++m) {
        auto& dens = spec_.prior_density[static_cast<std::size_t>(m)];
        if (dens.size() != static_cast<std::size_t>(K))
            throw DomainError("shift-in-mean: prior density not aligned with the mean grid");
        for (double d : dens)
            if (!(d >= 0.0) || !std::isfinite(d))
                throw DomainError("shift-in-mean: prior density must be finite and nonnegative");
        // Truncate at the grid edges and renormalize.
        normalize_density(dens, mu_weights_);
        int k0 = -1, k1 = -1;
        for (int k = 0; k < K; ++k) {
            if (dens[static_cast<std::size_t>(k)] > 0.0) {
                if (k0 < 0) k0 = k;
                k1 = k;
            }
        }
        if (k0 < 0) throw DomainError("shift-in-mean: prior density is identically zero");
        support_[static_cast<std::size_t>(m)] = {k0, k1};
        double m1 = 0.0, m2 = 0.0;
        for (int k = k0; k <= k1; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            const double p = dens[ku] * mu_weights_[ku];
            log_weighted_prior_[static_cast<std::size_t>(m)][ku] =
                p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
            m1 += p * mu_nodes_[ku];
            m2 += p * mu_nodes_[ku] * mu_nodes_[ku];
        }
        prior_mean_[static_cast<std::size_t>(m)] = m1;
        prior_var_[static_cast<std::size_t>(m)] = std::max(0.0, m2 - m1 * m1);
    }
    // Mirror symmetry: H1/H3 densities reflected through zero, H2 density even.
    mirror_symmetric_ = spec_.hyp_prior[0] == spec_.hyp_prior[2] &&
                        spec_.mu_grid.lo == -spec_.mu_grid.hi;
    if (mirror_symmetric_) {
        for (int k = 0; k < K && mirror_symmetric_; ++k) {
            const auto a = static_cast<std::size_t>(k);
            const auto b = static_cast<std::size_t>(K - 1 - k);
            const double s01 = spec_.prior_density[0][a] + spec_.prior_density[2][b];
            const double s2 = spec_.prior_density[1][a] + spec_.prior_density[1][b];
            if (std::abs(spec_.prior_density[0][a] - spec_.prior_density[2][b]) >
                    1e-9 * std::max(1.0, s01) ||
                std::abs(spec_.prior_density[1][a] - spec_.prior_density[1][b]) >
                    1e-9 * std::max(1.0, s2))
                mirror_symmetric_ = false;
        }
    }
}

ObservationDomain ShiftInMeanModel::observation_domain() const {
    ObservationDomain d;
    d.discrete = false;
    d.continuous = spec_.x_grid;
    return d;
}

StatisticState ShiftInMeanModel::update_statistic(const StatisticState& s, double x) const {
    require_below_horizon(s);
    const double n = static_cast<double>(s.n);
    return {s.n + 1, (n * s.t1 + x) / (n + 1.0), 0.0};
}

void ShiftInMeanModel::check_domain(const StatisticState& s) const {
    if (s.n < 0 || s.n > spec_.horizon) throw DomainError("shift-in-mean: sample count outside 0..N");
    if (!std::isfinite(s.t1)) throw DomainError("shift-in-mean: non-finite statistic");
    if (s.n >= 1 && (s.t1 < spec_.stat_lo - 1e-9 || s.t1 > spec_.stat_hi + 1e-9))
        throw DomainError("shift-in-mean: statistic outside the declared domain");
}

ShiftInMeanModel::Analysis ShiftInMeanModel::analyze(const StatisticState& s,
                                                     bool want_moments) const {
    Analysis out;
    out.log_marg.assign(3, 0.0);
    out.probs = hyps_.prior;
    out.mean = prior_mean_;
    out.var = prior_var_;
    if (s.n == 0) return out;

    const double n = static_cast<double>(s.n);
    const double t = s.t1;
    const double inv2v = n / (2.0 * spec_.sigma2);
    const double lconst = -0.5 * std::log(kTwoPi * spec_.sigma2 / n);
    const double hw = kWindowSigmas * std::sqrt(spec_.sigma2 / n);
    const double h = spec_.mu_grid.step();

    thread_local std::vector<double> scratch;
    for (int m = 0; m < 3; ++m) {
        const auto [k0, k1] = support_[static_cast<std::size_t>(m)];
        int lo = std::max(k0, static_cast<int>(std::ceil((t - hw - spec_.mu_grid.lo) / h)));
        int hi = std::min(k1, static_cast<int>(std::floor((t + hw - spec_.mu_grid.lo) / h)));
        if (lo > hi) {
            // Posterior concentrates at the nearest edge of the prior support.
            if (t > mu_nodes_[static_cast<std::size_t>(k1)]) {
                hi = k1;
                lo = std::max(k0, k1 - 63);
            } else {
                lo = k0;
                hi = std::min(k1, k0 + 63);
            }
        }
        const auto count = static_cast<std::size_t>(hi - lo + 1);
        scratch.resize(count);
        const auto& wlp = log_weighted_prior_[static_cast<std::size_t>(m)];
        double lmax = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < count; ++j) {
            const std::size_t k = static_cast<std::size_t>(lo) + j;
            const double d = t - mu_nodes_[k];
            const double l = wlp[k] - inv2v * d * d;
            scratch[j] = l;
            lmax = std::max(lmax, l);
        }
        double m0 = 0.0, m1 = 0.0, m2 = 0.0;
        if (want_moments) {
            for (std::size_t j = 0; j < count; ++j) {
                const double e = fast_exp(scratch[j] - lmax);
                const double d = mu_nodes_[static_cast<std::size_t>(lo) + j] - t;
                m0 += e;
                m1 += e * d;
                m2 += e * d * d;
            }
        } else {
            for (std::size_t j = 0; j < count; ++j) m0 += fast_exp(scratch[j] - lmax);
        }
        out.log_marg[static_cast<std::size_t>(m)] = lmax + std::log(m0) + lconst;
        if (want_moments) {
            const double c = m1 / m0;
            out.mean[static_cast<std::size_t>(m)] = t + c;
            out.var[static_cast<std::size_t>(m)] = std::max(0.0, m2 / m0 - c * c);
        }
    }

    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> lp(3);
    for (int m = 0; m < 3; ++m) {
        lp[static_cast<std::size_t>(m)] = std::log(hyps_.prior[static_cast<std::size_t>(m)]) +
                                          out.log_marg[static_cast<std::size_t>(m)];
        best = std::max(best, lp[static_cast<std::size_t>(m)]);
    }
    if (best < kUnderflowLog)
        throw DomainError("shift-in-mean: posterior mass underflow, state outside plausible region");
    double z = 0.0;
    for (int m = 0; m < 3; ++m) {
        out.probs[static_cast<std::size_t>(m)] = std::exp(lp[static_cast<std::size_t>(m)] - best);
        z += out.probs[static_cast<std::size_t>(m)];
    }
    for (auto& p : out.probs) p /= z;
    return out;
}

PosteriorSummary ShiftInMeanModel::posterior(const StatisticState& s) const {
    check_domain(s);
    auto a = analyze(s, true);
    return {std::move(a.probs), std::move(a.mean), std::move(a.var)};
}

std::vector<double> ShiftInMeanModel::log_marginals(const StatisticState& s) const {
    check_domain(s);
    return analyze(s, false).log_marg;
}

double ShiftInMeanModel::conditional_predictive(const StatisticState& s, double x, int m) const {
    check_domain(s);
    if (s.n >= spec_.horizon) throw HorizonError("conditional predictive: state at horizon");
    const auto next = update_statistic(s, x);
    const double z_next = analyze(next, false).log_marg[static_cast<std::size_t>(m)];
    if (s.n == 0) return std::exp(z_next);
    const double z_cur = analyze(s, false).log_marg[static_cast<std::size_t>(m)];
    const double n = static_cast<double>(s.n);
    const double s2 = spec_.sigma2 * (n + 1.0) / n;
    const double d = x - s.t1;
    const double lc = -0.5 * std::log(kTwoPi * s2) - d * d / (2.0 * s2);
    return std::exp(lc + z_next - z_cur);
}

StageTables ShiftInMeanModel::build_tables(const GridSpec& stat_grid, int N,
                                           unsigned threads) const {
    stat_grid.validate();
    if (stat_grid.dim() != 1) throw DomainError("shift-in-mean: statistic grid must be 1-D");
    StageTables T;
    T.grid = stat_grid;
    T.N = N;
    T.M = 3;
    const std::size_t nodes = T.nodes();
    const std::size_t total = static_cast<std::size_t>(N + 1) * 3 * nodes;
    T.log_marg.assign(total, 0.0);
    T.post_prob.assign(total, 0.0);
    T.mean.assign(total, 0.0);
    T.var.assign(total, 0.0);
    parallel_for(nodes, threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double t = stat_grid.axes[0].node(static_cast<int>(i));
            for (int n = 0; n <= N; ++n) {
                const auto a = analyze({n, t, 0.0}, true);
                for (int m = 0; m < 3; ++m) {
                    const std::size_t off = T.offset(n, m) + i;
                    T.log_marg[off] = a.log_marg[static_cast<std::size_t>(m)];
                    T.post_prob[off] = a.probs[static_cast<std::size_t>(m)];
                    T.mean[off] = a.mean[static_cast<std::size_t>(m)];
                    T.var[off] = a.var[static_cast<std::size_t>(m)];
                }
            }
        }
    });
    return T;
}

void ShiftInMeanModel::conditional_rows(const StageTables& tables, const StatisticState& s,
                                        std::span<const double> xs, double* out) const {
    if (s.n >= tables.N) throw SolverError("conditional rows: state at the table horizon");
    const auto& axis = tables.grid.axes[0];
    const std::size_t nx = xs.size();
    const double n = static_cast<double>(s.n);
    const double t = s.t1;

    thread_local std::vector<double> lc;
    lc.resize(nx);
    if (s.n == 0) {
        std::fill(lc.begin(), lc.end(), 0.0);
    } else {
        const double s2 = spec_.sigma2 * (n + 1.0) / n;
        const double inv2 = 1.0 / (2.0 * s2);
        const double c0 = -0.5 * std::log(kTwoPi * s2);
        for (std::size_t j = 0; j < nx; ++j) {
            const double d = xs[j] - t;
            lc[j] = c0 - d * d * inv2;
        }
    }

    for (int m = 0; m < 3; ++m) {
        const auto z_next = tables.slice(tables.log_marg, s.n + 1, m);
        double z_cur = 0.0;
        if (s.n > 0) {
            const auto z_now = tables.slice(tables.log_marg, s.n, m);
            const auto [k, a] = axis.locate(t);
            z_cur = (1.0 - a) * z_now[static_cast<std::size_t>(k)] +
                    a * z_now[static_cast<std::size_t>(k) + 1];
        }
        double* row = out + static_cast<std::size_t>(m) * nx;
        for (std::size_t j = 0; j < nx; ++j) {
            const double xi = (n * t + xs[j]) / (n + 1.0);
            const auto [k, a] = axis.locate(xi);
            const double lz = (1.0 - a) * z_next[static_cast<std::size_t>(k)] +
                              a * z_next[static_cast<std::size_t>(k) + 1];
            row[j] = fast_exp(lc[j] + lz - z_cur);
        }
    }
}

void ShiftInMeanModel::transition_row(const StatisticState& s, std::span<const double> xs,
                                      double* out_t1, double* out_t2) const {
    const double n = static_cast<double>(s.n);
    const double inv = 1.0 / (n + 1.0);
    const double base = n * s.t1 * inv;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        out_t1[j] = base + xs[j] * inv;
        out_t2[j] = 0.0;
    }
}

double ShiftInMeanModel::sample_parameter(int m, RngEngine& rng) const {
    if (m == 1) {
        std::uniform_real_distribution<double> u(spec_.uniform_lo, spec_.uniform_hi);
        return u(rng);
    }
    std::gamma_distribution<double> g(spec_.gamma_shape, spec_.gamma_scale);
    const double draw = g(rng);
    return m == 0 ? spec_.gamma_offset - draw : spec_.gamma_offset + draw;
}

double ShiftInMeanModel::sample_observation(int /*m*/, double theta, RngEngine& rng) const {
    std::normal_distribution<double> d(theta, std::sqrt(spec_.sigma2));
    return d(rng);
}

}  // namespace sequest
