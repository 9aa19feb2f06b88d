#include "sequest/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sequest {

namespace {

struct NodeSweep {
    const Model& model;
    const StageTables& tables;
    std::vector<double> xs, xw;

    explicit NodeSweep(const Model& m, const StageTables& t) : model(m), tables(t) {
        const auto dom = m.observation_domain();
        xs = dom.nodes();
        xw = dom.weights();
    }
};

std::string describe_state(int n, std::size_t node, const GridSpec& grid) {
    const auto pt = grid.point(node);
    std::ostringstream os;
    os << "stage n=" << n << ", node " << node << ", t=(" << pt[0];
    if (grid.dim() == 2) os << ", " << pt[1];
    os << ")";
    return os.str();
}

/// Stop cost D*_m for every m from tabulated posterior rows at one node.
inline void stop_costs_at(const StageTables& T, int n, std::size_t i, const CostCoefficients& c,
                          double* out) {
    const int M = T.M;
    double lam_dot = 0.0;
    for (int m = 0; m < M; ++m)
        lam_dot += c.lambda[static_cast<std::size_t>(m)] * T.post_prob[T.offset(n, m) + i];
    for (int m = 0; m < M; ++m) {
        const std::size_t off = T.offset(n, m) + i;
        const double p = T.post_prob[off];
        out[m] = c.mu[static_cast<std::size_t>(m)] * p * T.var[off] + lam_dot -
                 c.lambda[static_cast<std::size_t>(m)] * p;
    }
}

/// Continuation cost at a state: 1 + E[rho_{n+1}(xi(t, X)) | t] with the
/// marginal predictive renormalized on the observation grid.
double continuation_cost(const NodeSweep& sweep, const StatisticState& s,
                         const std::vector<double>& post_weights,
                         const std::vector<double>& rho_next) {
    const auto& T = sweep.tables;
    const int M = T.M;
    const std::size_t nx = sweep.xs.size();
    thread_local std::vector<double> cond, tr1, tr2;
    cond.resize(static_cast<std::size_t>(M) * nx);
    tr1.resize(nx);
    tr2.resize(nx);
    sweep.model.conditional_rows(T, s, sweep.xs, cond.data());
    sweep.model.transition_row(s, sweep.xs, tr1.data(), tr2.data());

    double mass = 0.0, acc = 0.0;
    if (T.grid.dim() == 1) {
        const auto& ax = T.grid.axes[0];
        for (std::size_t j = 0; j < nx; ++j) {
            double p = 0.0;
            for (int m = 0; m < M; ++m)
                p += post_weights[static_cast<std::size_t>(m)] * cond[static_cast<std::size_t>(m) * nx + j];
            const double wp = sweep.xw[j] * p;
            const auto [k, a] = ax.locate(tr1[j]);
            const double r = (1.0 - a) * rho_next[static_cast<std::size_t>(k)] +
                             a * rho_next[static_cast<std::size_t>(k) + 1];
            mass += wp;
            acc += wp * r;
        }
    } else {
        const auto& ax = T.grid.axes[0];
        const auto& ay = T.grid.axes[1];
        const std::size_t n1 = static_cast<std::size_t>(ay.count);
        for (std::size_t j = 0; j < nx; ++j) {
            double p = 0.0;
            for (int m = 0; m < M; ++m)
                p += post_weights[static_cast<std::size_t>(m)] * cond[static_cast<std::size_t>(m) * nx + j];
            const double wp = sweep.xw[j] * p;
            const auto [kx, a] = ax.locate(tr1[j]);
            const auto [ky, b] = ay.locate(tr2[j]);
            const std::size_t base = static_cast<std::size_t>(kx) * n1 + static_cast<std::size_t>(ky);
            const double r = (1.0 - a) * ((1.0 - b) * rho_next[base] + b * rho_next[base + 1]) +
                             a * ((1.0 - b) * rho_next[base + n1] + b * rho_next[base + n1 + 1]);
            mass += wp;
            acc += wp * r;
        }
    }
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw DegenerateDensityError("predictive density has nonpositive mass");
    return 1.0 + acc / mass;
}

}  // namespace

void CostCoefficients::validate(int M) const {
    if (static_cast<int>(lambda.size()) != M || static_cast<int>(mu.size()) != M)
        throw DomainError("cost coefficients: need one lambda and one mu per hypothesis");
    for (double v : lambda)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw DomainError("cost coefficients: lambda must be nonnegative and finite");
    for (double v : mu)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw DomainError("cost coefficients: mu must be nonnegative and finite");
}

std::vector<double> stop_costs(const PosteriorSummary& post, const CostCoefficients& c) {
    const int M = static_cast<int>(post.hyp_probs.size());
    std::vector<double> out(static_cast<std::size_t>(M));
    double lam_dot = 0.0;
    for (int m = 0; m < M; ++m)
        lam_dot += c.lambda[static_cast<std::size_t>(m)] * post.hyp_probs[static_cast<std::size_t>(m)];
    for (int m = 0; m < M; ++m) {
        const auto mu = static_cast<std::size_t>(m);
        out[mu] = c.mu[mu] * post.hyp_probs[mu] * post.param_var[mu] + lam_dot -
                  c.lambda[mu] * post.hyp_probs[mu];
    }
    return out;
}

std::vector<double> stop_costs(const Model& model, const StatisticState& s,
                               const CostCoefficients& c) {
    return stop_costs(model.posterior(s), c);
}

std::pair<double, int> stopping_envelope(const PosteriorSummary& post, const CostCoefficients& c) {
    const auto d = stop_costs(post, c);
    int best = 0;
    for (int m = 1; m < static_cast<int>(d.size()); ++m)
        if (d[static_cast<std::size_t>(m)] < d[static_cast<std::size_t>(best)]) best = m;
    return {d[static_cast<std::size_t>(best)], best};
}

std::size_t mirror_flat_index(const GridSpec& grid, std::size_t flat) {
    const auto n0 = static_cast<std::size_t>(grid.axes[0].count);
    if (grid.dim() == 1) return n0 - 1 - flat;
    const auto n1 = static_cast<std::size_t>(grid.axes[1].count);
    const std::size_t i0 = flat / n1;
    return (n0 - 1 - i0) * n1 + flat % n1;
}

CostTable backward_induction(const Model& model, const StageTables& tables,
                             const CostCoefficients& coeffs, const SolverOptions& opts) {
    const int M = tables.M;
    const int N = tables.N;
    coeffs.validate(M);
    const std::size_t nodes = tables.nodes();
    const bool mirror = opts.exploit_symmetry && model.has_mirror_symmetry();
    const std::size_t n0 = static_cast<std::size_t>(tables.grid.axes[0].count);
    const std::size_t sweep_rows = mirror ? (n0 + 1) / 2 : n0;
    const std::size_t row_len = nodes / n0;
    const std::size_t sweep_nodes = sweep_rows * row_len;

    CostTable out;
    out.grid = tables.grid;
    out.N = N;
    out.rho.assign(static_cast<std::size_t>(N) + 1, std::vector<double>(nodes, 0.0));
    out.d.assign(static_cast<std::size_t>(N), std::vector<double>(nodes, 0.0));
    out.g.assign(static_cast<std::size_t>(N) + 1, std::vector<double>(nodes, 0.0));

    // Stop costs per stage; mirrored halves copied so ties resolve symmetrically.
    for (int n = 0; n <= N; ++n) {
        auto& g = out.g[static_cast<std::size_t>(n)];
        parallel_for(sweep_nodes, opts.threads, [&](std::size_t b, std::size_t e) {
            std::vector<double> dcost(static_cast<std::size_t>(M));
            for (std::size_t i = b; i < e; ++i) {
                stop_costs_at(tables, n, i, coeffs, dcost.data());
                g[i] = *std::min_element(dcost.begin(), dcost.end());
            }
        });
        if (mirror)
            for (std::size_t i = 0; i < sweep_nodes; ++i) g[mirror_flat_index(tables.grid, i)] = g[i];
    }

    out.rho[static_cast<std::size_t>(N)] = out.g[static_cast<std::size_t>(N)];

    for (int n = N - 1; n >= 0; --n) {
        const auto& rho_next = out.rho[static_cast<std::size_t>(n) + 1];
        auto& d = out.d[static_cast<std::size_t>(n)];
        auto& rho = out.rho[static_cast<std::size_t>(n)];
        const auto& g = out.g[static_cast<std::size_t>(n)];
        parallel_for(sweep_nodes, opts.threads, [&](std::size_t b, std::size_t e) {
            NodeSweep sweep(model, tables);
            std::vector<double> pw(static_cast<std::size_t>(M));
            for (std::size_t i = b; i < e; ++i) {
                const auto pt = tables.grid.point(i);
                const StatisticState s{n, pt[0], pt[1]};
                for (int m = 0; m < M; ++m)
                    pw[static_cast<std::size_t>(m)] = tables.post_prob[tables.offset(n, m) + i];
                try {
                    d[i] = continuation_cost(sweep, s, pw, rho_next);
                } catch (const DegenerateDensityError& err) {
                    throw SolverError(std::string("degenerate predictive density at ") +
                                      describe_state(n, i, tables.grid));
                }
                rho[i] = std::min(g[i], d[i]);
            }
        });
        if (mirror) {
            for (std::size_t i = 0; i < sweep_nodes; ++i) {
                const std::size_t im = mirror_flat_index(tables.grid, i);
                d[im] = d[i];
                rho[im] = rho[i];
            }
        }
    }

    // Stage-0 quantities at the initial state, which need not be a grid node.
    const auto s0 = model.initial_state();
    const auto post0 = model.posterior(s0);
    out.g0_init = stopping_envelope(post0, coeffs).first;
    if (N >= 1) {
        NodeSweep sweep(model, tables);
        try {
            out.d0_init = continuation_cost(sweep, s0, post0.hyp_probs, out.rho[1]);
        } catch (const DegenerateDensityError&) {
            throw SolverError("degenerate predictive density at the initial state");
        }
    } else {
        out.d0_init = std::numeric_limits<double>::infinity();
    }
    out.rho0_init = opts.min_samples_one ? out.d0_init : std::min(out.g0_init, out.d0_init);
    return out;
}

Policy extract_policy(const CostTable& table, const Model& model, const StageTables& tables,
                      const CostCoefficients& coeffs, const SolverOptions& opts) {
    const int M = tables.M;
    const int N = tables.N;
    const std::size_t nodes = tables.nodes();
    const bool mirror = opts.exploit_symmetry && model.has_mirror_symmetry();
    const std::size_t n0 = static_cast<std::size_t>(tables.grid.axes[0].count);
    const std::size_t sweep_rows = mirror ? (n0 + 1) / 2 : n0;
    const std::size_t sweep_nodes = sweep_rows * (nodes / n0);

    Policy pol;
    pol.grid = tables.grid;
    pol.N = N;
    pol.M = M;
    pol.min_samples_one = opts.min_samples_one;
    pol.stop.assign(static_cast<std::size_t>(N) + 1, std::vector<std::uint8_t>(nodes, 0));
    pol.decision.assign(static_cast<std::size_t>(N) + 1, std::vector<std::int32_t>(nodes, 0));
    pol.estimate.assign(static_cast<std::size_t>(N) + 1,
                        std::vector<double>(static_cast<std::size_t>(M) * nodes, 0.0));

    for (int n = 0; n <= N; ++n) {
        auto& stop = pol.stop[static_cast<std::size_t>(n)];
        auto& dec = pol.decision[static_cast<std::size_t>(n)];
        auto& est = pol.estimate[static_cast<std::size_t>(n)];
        parallel_for(sweep_nodes, opts.threads, [&](std::size_t b, std::size_t e) {
            std::vector<double> dcost(static_cast<std::size_t>(M));
            for (std::size_t i = b; i < e; ++i) {
                stop_costs_at(tables, n, i, coeffs, dcost.data());
                int best = 0;
                for (int m = 1; m < M; ++m)
                    if (dcost[static_cast<std::size_t>(m)] < dcost[static_cast<std::size_t>(best)])
                        best = m;
                dec[i] = best;
                // Stop where stopping is no more expensive than continuing;
                // the boundary g = d stops.
                if (n == N) {
                    stop[i] = 1;
                } else {
                    const double g = table.g[static_cast<std::size_t>(n)][i];
                    const double d = table.d[static_cast<std::size_t>(n)][i];
                    stop[i] = g <= d ? 1 : 0;
                }
                if (n == 0 && opts.min_samples_one) stop[i] = 0;
                for (int m = 0; m < M; ++m)
                    est[static_cast<std::size_t>(m) * nodes + i] =
                        tables.mean[tables.offset(n, m) + i];
            }
        });
        if (mirror) {
            for (std::size_t i = 0; i < sweep_nodes; ++i) {
                const std::size_t im = mirror_flat_index(tables.grid, i);
                stop[im] = stop[i];
                dec[im] = static_cast<std::int32_t>(model.mirror_hypothesis(dec[i]));
                for (int m = 0; m < M; ++m) {
                    const int src = model.mirror_hypothesis(m);
                    est[static_cast<std::size_t>(m) * nodes + im] = model.mirror_parameter(
                        m, est[static_cast<std::size_t>(src) * nodes + i]);
                }
            }
        }
    }

    const auto post0 = model.posterior(model.initial_state());
    const auto [g0, dec0] = stopping_envelope(post0, coeffs);
    pol.decision_init = dec0;
    pol.estimate_init = post0.param_mean;
    pol.stop_init = (!opts.min_samples_one && g0 <= table.d0_init) ? 1 : 0;
    return pol;
}

double bellman_residual(const CostTable& table) {
    double worst = 0.0;
    const std::size_t N = table.rho.size() - 1;
    for (std::size_t i = 0; i < table.rho[N].size(); ++i)
        worst = std::max(worst, std::abs(table.rho[N][i] - table.g[N][i]));
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t i = 0; i < table.rho[n].size(); ++i)
            worst = std::max(worst,
                             std::abs(table.rho[n][i] - std::min(table.g[n][i], table.d[n][i])));
    return worst;
}

}  // namespace sequest
