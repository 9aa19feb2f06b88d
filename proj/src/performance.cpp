#include "sequest/performance.hpp"

#include <algorithm>
#include <cmath>

namespace sequest {

namespace {

/// Conditional expectations of the next-stage alpha/beta fields under each
/// hypothesis, with the conditional predictive renormalized per hypothesis.
void continue_update(const Model& model, const StageTables& T, const StatisticState& s,
                     std::span<const double> xs, std::span<const double> xw,
                     const std::vector<double>& alpha_next, const std::vector<double>& beta_next,
                     std::size_t nodes, double* alpha_out, double* beta_out) {
    const int M = T.M;
    const std::size_t nx = xs.size();
    thread_local std::vector<double> cond, tr1, tr2;
    cond.resize(static_cast<std::size_t>(M) * nx);
    tr1.resize(nx);
    tr2.resize(nx);
    model.conditional_rows(T, s, xs, cond.data());
    model.transition_row(s, xs, tr1.data(), tr2.data());

    const bool two_d = T.grid.dim() == 2;
    const auto& ax = T.grid.axes[0];
    const std::size_t n1 = two_d ? static_cast<std::size_t>(T.grid.axes[1].count) : 0;
    for (int m = 0; m < M; ++m) {
        const double* row = cond.data() + static_cast<std::size_t>(m) * nx;
        const double* an = alpha_next.data() + static_cast<std::size_t>(m) * nodes;
        const double* bn = beta_next.data() + static_cast<std::size_t>(m) * nodes;
        double mass = 0.0, acc_a = 0.0, acc_b = 0.0;
        if (!two_d) {
            for (std::size_t j = 0; j < nx; ++j) {
                const double wp = xw[j] * row[j];
                const auto [k, a] = ax.locate(tr1[j]);
                const auto ku = static_cast<std::size_t>(k);
                mass += wp;
                acc_a += wp * ((1.0 - a) * an[ku] + a * an[ku + 1]);
                acc_b += wp * ((1.0 - a) * bn[ku] + a * bn[ku + 1]);
            }
        } else {
            const auto& ay = T.grid.axes[1];
            for (std::size_t j = 0; j < nx; ++j) {
                const double wp = xw[j] * row[j];
                const auto [kx, a] = ax.locate(tr1[j]);
                const auto [ky, b] = ay.locate(tr2[j]);
                const std::size_t base =
                    static_cast<std::size_t>(kx) * n1 + static_cast<std::size_t>(ky);
                mass += wp;
                acc_a += wp * ((1.0 - a) * ((1.0 - b) * an[base] + b * an[base + 1]) +
                               a * ((1.0 - b) * an[base + n1] + b * an[base + n1 + 1]));
                acc_b += wp * ((1.0 - a) * ((1.0 - b) * bn[base] + b * bn[base + 1]) +
                               a * ((1.0 - b) * bn[base + n1] + b * bn[base + n1 + 1]));
            }
        }
        if (!(mass > 0.0) || !std::isfinite(mass))
            throw SolverError("error recursion: degenerate conditional density");
        alpha_out[m] = acc_a / mass;
        beta_out[m] = acc_b / mass;
    }
}

}  // namespace

PerformanceTable error_recursion(const Policy& policy, const Model& model,
                                 const StageTables& tables, unsigned threads) {
    const int M = tables.M;
    const int N = tables.N;
    const std::size_t nodes = tables.nodes();
    const auto dom = model.observation_domain();
    const auto xs = dom.nodes();
    const auto xw = dom.weights();

    PerformanceTable perf;
    perf.grid = tables.grid;
    perf.N = N;
    perf.M = M;
    perf.alpha.assign(static_cast<std::size_t>(N) + 1,
                      std::vector<double>(static_cast<std::size_t>(M) * nodes, 0.0));
    perf.beta.assign(static_cast<std::size_t>(N) + 1,
                     std::vector<double>(static_cast<std::size_t>(M) * nodes, 0.0));

    // Terminal stage: the scheme stops and decides everywhere.
    {
        auto& alpha = perf.alpha[static_cast<std::size_t>(N)];
        auto& beta = perf.beta[static_cast<std::size_t>(N)];
        const auto& dec = policy.decision[static_cast<std::size_t>(N)];
        for (std::size_t i = 0; i < nodes; ++i) {
            for (int m = 0; m < M; ++m) {
                const bool right = dec[i] == m;
                alpha[static_cast<std::size_t>(m) * nodes + i] = right ? 0.0 : 1.0;
                beta[static_cast<std::size_t>(m) * nodes + i] =
                    right ? tables.var[tables.offset(N, m) + i] : 0.0;
            }
        }
    }

    for (int n = N - 1; n >= 0; --n) {
        const auto& alpha_next = perf.alpha[static_cast<std::size_t>(n) + 1];
        const auto& beta_next = perf.beta[static_cast<std::size_t>(n) + 1];
        auto& alpha = perf.alpha[static_cast<std::size_t>(n)];
        auto& beta = perf.beta[static_cast<std::size_t>(n)];
        const auto& stop = policy.stop[static_cast<std::size_t>(n)];
        const auto& dec = policy.decision[static_cast<std::size_t>(n)];
        parallel_for(nodes, threads, [&](std::size_t b, std::size_t e) {
            std::vector<double> a_out(static_cast<std::size_t>(M)), b_out(static_cast<std::size_t>(M));
            for (std::size_t i = b; i < e; ++i) {
                if (stop[i]) {
                    for (int m = 0; m < M; ++m) {
                        const bool right = dec[i] == m;
                        alpha[static_cast<std::size_t>(m) * nodes + i] = right ? 0.0 : 1.0;
                        beta[static_cast<std::size_t>(m) * nodes + i] =
                            right ? tables.var[tables.offset(n, m) + i] : 0.0;
                    }
                    continue;
                }
                const auto pt = tables.grid.point(i);
                continue_update(model, tables, {n, pt[0], pt[1]}, xs, xw, alpha_next, beta_next,
                                nodes, a_out.data(), b_out.data());
                for (int m = 0; m < M; ++m) {
                    alpha[static_cast<std::size_t>(m) * nodes + i] = a_out[static_cast<std::size_t>(m)];
                    beta[static_cast<std::size_t>(m) * nodes + i] = b_out[static_cast<std::size_t>(m)];
                }
            }
        });
    }

    // Initial state.
    perf.alpha0.assign(static_cast<std::size_t>(M), 0.0);
    perf.beta0.assign(static_cast<std::size_t>(M), 0.0);
    const auto s0 = model.initial_state();
    if (policy.stop_init) {
        const auto post0 = model.posterior(s0);
        for (int m = 0; m < M; ++m) {
            const bool right = policy.decision_init == m;
            perf.alpha0[static_cast<std::size_t>(m)] = right ? 0.0 : 1.0;
            perf.beta0[static_cast<std::size_t>(m)] =
                right ? post0.param_var[static_cast<std::size_t>(m)] : 0.0;
        }
    } else {
        continue_update(model, tables, s0, xs, xw, perf.alpha[1], perf.beta[1], nodes,
                        perf.alpha0.data(), perf.beta0.data());
    }
    return perf;
}

double expected_runlength(const CostTable& table, const CostCoefficients& coeffs,
                          const std::vector<double>& priors, const PerformanceTable& perf) {
    double penalty = 0.0;
    for (std::size_t m = 0; m < priors.size(); ++m)
        penalty += priors[m] * (coeffs.lambda[m] * perf.alpha0[m] + coeffs.mu[m] * perf.beta0[m]);
    return table.rho0_init - penalty;
}

std::vector<double> design_gradient(const PerformanceTable& perf,
                                    const std::vector<double>& alpha_bar,
                                    const std::vector<double>& beta_bar,
                                    const std::vector<double>& priors) {
    const std::size_t M = priors.size();
    std::vector<double> grad(2 * M);
    for (std::size_t m = 0; m < M; ++m) {
        grad[m] = priors[m] * (perf.alpha0[m] - alpha_bar[m]);
        grad[M + m] = priors[m] * (perf.beta0[m] - beta_bar[m]);
    }
    return grad;
}

GridFunction likelihood_ratio_field(const StageTables& tables, int n, int m,
                                    const std::vector<double>& priors) {
    GridFunction z(tables.grid);
    const auto probs = tables.slice(tables.post_prob, n, m);
    for (std::size_t i = 0; i < z.values.size(); ++i)
        z.values[i] = probs[i] / priors[static_cast<std::size_t>(m)];
    return z;
}

std::vector<DerivativeCheck> verify_derivative_identity(const Model& model,
                                                        const StageTables& tables,
                                                        const CostCoefficients& coeffs,
                                                        double h_rel, const SolverOptions& opts) {
    const int M = tables.M;
    const auto& priors = model.hypotheses().prior;

    const auto base_table = backward_induction(model, tables, coeffs, opts);
    const auto base_policy = extract_policy(base_table, model, tables, coeffs, opts);
    const auto perf = error_recursion(base_policy, model, tables, opts.threads);

    auto rho0_at = [&](const CostCoefficients& c) {
        return backward_induction(model, tables, c, opts).rho0_init;
    };

    CostCoefficients work = coeffs;
    std::vector<DerivativeCheck> checks;
    checks.reserve(static_cast<std::size_t>(2 * M));
    for (int k = 0; k < 2 * M; ++k) {
        DerivativeCheck chk;
        chk.index = k;
        chk.is_mu = k >= M;
        chk.hypothesis = k % M;
        const auto mu = static_cast<std::size_t>(chk.hypothesis);
        double& slot = chk.is_mu ? work.mu[mu] : work.lambda[mu];
        const double c0 = slot;
        const double h = h_rel * std::max(1.0, std::abs(c0));
        if (c0 - h >= 0.0) {
            slot = c0 + h;
            const double hi = rho0_at(work);
            slot = c0 - h;
            const double lo = rho0_at(work);
            slot = c0;
            chk.finite_difference = (hi - lo) / (2.0 * h);
        } else {
            chk.one_sided = true;
            slot = c0 + h;
            const double hi = rho0_at(work);
            slot = c0;
            const double lo = base_table.rho0_init;
            chk.finite_difference = (hi - lo) / h;
        }
        chk.identity = priors[mu] * (chk.is_mu ? perf.beta0[mu] : perf.alpha0[mu]);
        const double denom = std::max(std::abs(chk.identity), 1e-12);
        chk.rel_error = std::abs(chk.finite_difference - chk.identity) / denom;
        checks.push_back(chk);
    }
    return checks;
}

}  // namespace sequest
