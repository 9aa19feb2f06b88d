#include "toy_model.hpp"

#include <cmath>

namespace sequest::testsupport {

ToyBernoulliModel::ToyBernoulliModel(ToyBernoulliSpec spec) : spec_(std::move(spec)) {
    if (spec_.horizon < 1) throw DomainError("toy model: horizon must be at least 1");
    hyps_ = HypothesisSet{2, spec_.hyp_prior};
    hyps_.validate();
    for (int m = 0; m < 2; ++m)
        for (int i = 0; i < 2; ++i) {
            const double th = spec_.theta[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
            if (!(th > 0.0 && th < 1.0)) throw DomainError("toy model: success probs must be in (0,1)");
        }
}

ObservationDomain ToyBernoulliModel::observation_domain() const {
    ObservationDomain d;
    d.discrete = true;
    d.atoms = {0.0, 1.0};
    return d;
}

GridSpec ToyBernoulliModel::statistic_grid() const {
    return GridSpec{{GridAxis{0.0, static_cast<double>(spec_.horizon), spec_.horizon + 1}}};
}

StatisticState ToyBernoulliModel::update_statistic(const StatisticState& s, double x) const {
    require_below_horizon(s);
    return {s.n + 1, s.t1 + x, 0.0};
}

double ToyBernoulliModel::marginal_mass(int m, double k, int n) const {
    double z = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double th = spec_.theta[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
        const double w = spec_.weight[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
        z += w * std::pow(th, k) * std::pow(1.0 - th, static_cast<double>(n) - k);
    }
    return z;
}

PosteriorSummary ToyBernoulliModel::posterior(const StatisticState& s) const {
    if (s.n < 0 || s.n > spec_.horizon) throw DomainError("toy model: sample count outside 0..N");
    PosteriorSummary out;
    out.hyp_probs.resize(2);
    out.param_mean.resize(2);
    out.param_var.resize(2);
    double total = 0.0;
    for (int m = 0; m < 2; ++m) {
        double z = 0.0, z1 = 0.0, z2 = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double th = spec_.theta[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
            const double w = spec_.weight[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
            const double mass = w * std::pow(th, s.t1) *
                                std::pow(1.0 - th, static_cast<double>(s.n) - s.t1);
            z += mass;
            z1 += mass * th;
            z2 += mass * th * th;
        }
        const auto mu = static_cast<std::size_t>(m);
        out.hyp_probs[mu] = hyps_.prior[mu] * z;
        out.param_mean[mu] = z1 / z;
        out.param_var[mu] = std::max(0.0, z2 / z - (z1 / z) * (z1 / z));
        total += out.hyp_probs[mu];
    }
    for (auto& p : out.hyp_probs) p /= total;
    return out;
}

std::vector<double> ToyBernoulliModel::log_marginals(const StatisticState& s) const {
    std::vector<double> lm(2);
    for (int m = 0; m < 2; ++m)
        lm[static_cast<std::size_t>(m)] = std::log(marginal_mass(m, s.t1, s.n));
    return lm;
}

double ToyBernoulliModel::conditional_predictive(const StatisticState& s, double x, int m) const {
    return marginal_mass(m, s.t1 + x, s.n + 1) / marginal_mass(m, s.t1, s.n);
}

double ToyBernoulliModel::sample_parameter(int m, RngEngine& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int i = u(rng) < spec_.weight[static_cast<std::size_t>(m)][0] ? 0 : 1;
    return spec_.theta[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
}

double ToyBernoulliModel::sample_observation(int /*m*/, double theta, RngEngine& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < theta ? 1.0 : 0.0;
}

}  // namespace sequest::testsupport
