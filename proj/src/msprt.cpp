#include "sequest/msprt.hpp"

#include <algorithm>
#include <cmath>

namespace sequest {

void MsprtConfig::validate(int M) const {
    if (static_cast<int>(thresholds.size()) != M)
        throw DomainError("msprt: need one threshold per hypothesis");
    for (double a : thresholds)
        if (!std::isfinite(a)) throw DomainError("msprt: thresholds must be finite");
    if (N < 1) throw DomainError("msprt: horizon must be at least 1");
}

std::vector<double> msprt_thresholds(int M, const std::vector<double>& alpha_bar) {
    std::vector<double> a(alpha_bar.size());
    for (std::size_t m = 0; m < alpha_bar.size(); ++m) {
        if (!(alpha_bar[m] > 0.0 && alpha_bar[m] < 1.0))
            throw DomainError("msprt: error constraints must lie in (0,1)");
        a[m] = std::log(static_cast<double>(M) / alpha_bar[m]);
    }
    return a;
}

MsprtStep msprt_step(const std::vector<double>& lm, const MsprtConfig& config, bool truncated) {
    const int M = static_cast<int>(lm.size());
    MsprtStep out;
    if (truncated) {
        // argmax_m sum_{j != m} eta_mj reduces to argmax of the marginal.
        out.stop = true;
        out.decision = static_cast<int>(std::max_element(lm.begin(), lm.end()) - lm.begin());
        return out;
    }
    for (int m = 0; m < M; ++m) {
        bool all = true;
        for (int j = 0; j < M && all; ++j) {
            if (j == m) continue;
            const double eta = lm[static_cast<std::size_t>(m)] - lm[static_cast<std::size_t>(j)];
            all = eta >= config.thresholds[static_cast<std::size_t>(m)];
        }
        if (all) {
            out.stop = true;
            out.decision = m;
            return out;
        }
    }
    return out;
}

MsprtRunner::MsprtRunner(const Model& model, MsprtConfig config, const StageTables* tables)
    : model_(model), config_(std::move(config)), tables_(tables) {
    config_.validate(model_.hypotheses().count);
}

std::vector<double> MsprtRunner::log_marginals_at(const StatisticState& s) const {
    if (tables_ != nullptr && s.n <= tables_->N) {
        const auto& grid = tables_->grid;
        double t1 = std::clamp(s.t1, grid.axes[0].lo, grid.axes[0].hi);
        std::vector<double> lm(static_cast<std::size_t>(tables_->M));
        if (grid.dim() == 1) {
            const auto [k, a] = grid.axes[0].locate(t1);
            for (int m = 0; m < tables_->M; ++m) {
                const auto z = tables_->slice(tables_->log_marg, s.n, m);
                lm[static_cast<std::size_t>(m)] = (1.0 - a) * z[static_cast<std::size_t>(k)] +
                                                  a * z[static_cast<std::size_t>(k) + 1];
            }
        } else {
            double t2 = std::clamp(s.t2, grid.axes[1].lo, grid.axes[1].hi);
            const auto [kx, a] = grid.axes[0].locate(t1);
            const auto [ky, b] = grid.axes[1].locate(t2);
            const std::size_t n1 = static_cast<std::size_t>(grid.axes[1].count);
            const std::size_t base = static_cast<std::size_t>(kx) * n1 + static_cast<std::size_t>(ky);
            for (int m = 0; m < tables_->M; ++m) {
                const auto z = tables_->slice(tables_->log_marg, s.n, m);
                lm[static_cast<std::size_t>(m)] =
                    (1.0 - a) * ((1.0 - b) * z[base] + b * z[base + 1]) +
                    a * ((1.0 - b) * z[base + n1] + b * z[base + n1 + 1]);
            }
        }
        return lm;
    }
    return model_.log_marginals(s);
}

double MsprtRunner::estimate_at(const StatisticState& s, int decision) const {
    if (tables_ != nullptr && s.n <= tables_->N) {
        const auto& grid = tables_->grid;
        const double t1 = std::clamp(s.t1, grid.axes[0].lo, grid.axes[0].hi);
        const auto mean = tables_->slice(tables_->mean, s.n, decision);
        if (grid.dim() == 1) {
            const auto [k, a] = grid.axes[0].locate(t1);
            return (1.0 - a) * mean[static_cast<std::size_t>(k)] +
                   a * mean[static_cast<std::size_t>(k) + 1];
        }
        const double t2 = std::clamp(s.t2, grid.axes[1].lo, grid.axes[1].hi);
        const auto [kx, a] = grid.axes[0].locate(t1);
        const auto [ky, b] = grid.axes[1].locate(t2);
        const std::size_t n1 = static_cast<std::size_t>(grid.axes[1].count);
        const std::size_t base = static_cast<std::size_t>(kx) * n1 + static_cast<std::size_t>(ky);
        return (1.0 - a) * ((1.0 - b) * mean[base] + b * mean[base + 1]) +
               a * ((1.0 - b) * mean[base + n1] + b * mean[base + n1 + 1]);
    }
    return model_.posterior(s).param_mean[static_cast<std::size_t>(decision)];
}

SchemeRunner::Step MsprtRunner::step(const StatisticState& s, bool truncated) const {
    Step out;
    // Clamp into the model's statistic domain; excursions are reported.
    StatisticState c = s;
    if (tables_ != nullptr) {
        const auto& grid = tables_->grid;
        const double lo = grid.axes[0].lo, hi = grid.axes[0].hi;
        if (c.t1 < lo || c.t1 > hi) {
            out.exited_grid = true;
            c.t1 = std::clamp(c.t1, lo, hi);
        }
        if (grid.dim() == 2) {
            const double lo2 = grid.axes[1].lo, hi2 = grid.axes[1].hi;
            if (c.t2 < lo2 || c.t2 > hi2) {
                out.exited_grid = true;
                c.t2 = std::clamp(c.t2, lo2, hi2);
            }
        }
    }
    const auto lm = log_marginals_at(c);
    const auto st = msprt_step(lm, config_, truncated || s.n >= config_.N);
    out.stop = st.stop;
    if (st.stop) {
        out.decision = st.decision;
        out.estimate = estimate_at(c, st.decision);
    }
    return out;
}

}  // namespace sequest
