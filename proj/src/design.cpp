#include "sequest/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sequest/montecarlo.hpp"

namespace sequest {

namespace {

struct Evaluation {
    CostTable table;
    Policy policy;
    std::vector<double> alpha, beta;
    std::vector<double> alpha_se, beta_se;  // zero in grid mode
    double objective = 0.0;
    double expected_tau = 0.0;
};

Evaluation evaluate(const Model& model, const StageTables& tables, const ConstraintSpec& cons,
                    const CostCoefficients& c, const PgaConfig& cfg,
                    const SolverOptions& solver_opts, int iter) {
    const int M = tables.M;
    const auto& priors = model.hypotheses().prior;
    Evaluation ev;
    ev.table = backward_induction(model, tables, c, solver_opts);
    ev.policy = extract_policy(ev.table, model, tables, c, solver_opts);
    ev.alpha_se.assign(static_cast<std::size_t>(M), 0.0);
    ev.beta_se.assign(static_cast<std::size_t>(M), 0.0);

    if (cfg.gradient_mode == PgaConfig::GradientMode::GridRecursion) {
        const auto perf = error_recursion(ev.policy, model, tables, solver_opts.threads);
        ev.alpha = perf.alpha0;
        ev.beta = perf.beta0;
    } else {
        ev.alpha.assign(static_cast<std::size_t>(M), 0.0);
        ev.beta.assign(static_cast<std::size_t>(M), 0.0);
        GridPolicyRunner runner(ev.policy, model);
        for (int m = 0; m < M; ++m) {
            const std::uint64_t seed =
                cfg.mc_seed + 1000003ULL * static_cast<std::uint64_t>(iter) +
                static_cast<std::uint64_t>(m);
            const auto rep = simulate(model, runner, cfg.mc_runs, seed,
                                      HypothesisMode::Conditional, m, solver_opts.threads);
            const auto mu = static_cast<std::size_t>(m);
            ev.alpha[mu] = rep.alpha_hat[mu];
            ev.beta[mu] = rep.beta_hat[mu];
            ev.alpha_se[mu] = rep.alpha_se[mu];
            ev.beta_se[mu] = rep.beta_se[mu];
        }
    }

    double bound_term = 0.0, achieved_term = 0.0;
    for (int m = 0; m < M; ++m) {
        const auto mu = static_cast<std::size_t>(m);
        bound_term += priors[mu] * (c.lambda[mu] * cons.alpha_bar[mu] + c.mu[mu] * cons.beta_bar[mu]);
        achieved_term += priors[mu] * (c.lambda[mu] * ev.alpha[mu] + c.mu[mu] * ev.beta[mu]);
    }
    ev.objective = ev.table.rho0_init - bound_term;
    ev.expected_tau = ev.table.rho0_init - achieved_term;
    return ev;
}

}  // namespace

void ConstraintSpec::validate(int M) const {
    if (static_cast<int>(alpha_bar.size()) != M || static_cast<int>(beta_bar.size()) != M)
        throw DomainError("constraints: need one alpha and one beta bound per hypothesis");
    for (double a : alpha_bar)
        if (!(a > 0.0 && a < 1.0)) throw DomainError("constraints: alpha bounds must lie in (0,1)");
    for (double b : beta_bar)
        if (!(b > 0.0)) throw DomainError("constraints: beta bounds must be positive");
}

PgaResult projected_gradient_ascent(const Model& model, const StageTables& tables,
                                    const ConstraintSpec& constraints,
                                    const CostCoefficients& init, const PgaConfig& cfg,
                                    const SolverOptions& solver_opts) {
    const int M = tables.M;
    constraints.validate(M);
    init.validate(M);
    if (!(cfg.gamma > 0.0)) throw DomainError("pga: gamma must be positive");
    if (!(cfg.tol_alpha > 0.0) || !(cfg.tol_beta > 0.0))
        throw DomainError("pga: tolerances must be positive");
    if (cfg.max_iter < 1) throw DomainError("pga: max_iter must be at least 1");
    std::vector<double> scale = cfg.gamma_scale;
    if (scale.empty()) scale.assign(static_cast<std::size_t>(2 * M), 1.0);
    if (static_cast<int>(scale.size()) != 2 * M)
        throw DomainError("pga: gamma_scale must have one entry per coefficient");

    const auto& priors = model.hypotheses().prior;
    CostCoefficients c = init;
    for (auto& v : c.lambda) v = std::max(v, 0.0);
    for (auto& v : c.mu) v = std::max(v, 0.0);

    PgaResult res;
    double best_violation = std::numeric_limits<double>::infinity();
    std::string best_summary;

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        auto ev = evaluate(model, tables, constraints, c, cfg, solver_opts, iter);
        res.trace.push_back({iter, c, ev.alpha, ev.beta, ev.objective});

        bool converged = true;
        double violation = 0.0;
        for (int m = 0; m < M && converged; ++m) {
            const auto mu = static_cast<std::size_t>(m);
            const double wa = cfg.tol_alpha + 3.0 * ev.alpha_se[mu];
            const double wb = cfg.tol_beta + 3.0 * ev.beta_se[mu];
            const bool lam_ok = (c.lambda[mu] == 0.0 && ev.alpha[mu] <= constraints.alpha_bar[mu] + wa) ||
                                std::abs(ev.alpha[mu] - constraints.alpha_bar[mu]) <= wa;
            const bool mu_ok = (c.mu[mu] == 0.0 && ev.beta[mu] <= constraints.beta_bar[mu] + wb) ||
                               std::abs(ev.beta[mu] - constraints.beta_bar[mu]) <= wb;
            converged = lam_ok && mu_ok;
        }
        for (int m = 0; m < M; ++m) {
            const auto mu = static_cast<std::size_t>(m);
            violation += std::max(0.0, ev.alpha[mu] - constraints.alpha_bar[mu]) +
                         std::max(0.0, ev.beta[mu] - constraints.beta_bar[mu]);
        }
        if (violation < best_violation) {
            best_violation = violation;
            std::ostringstream os;
            os << "closest achieved at iteration " << iter << ": alpha =";
            for (double a : ev.alpha) os << " " << a;
            os << ", beta =";
            for (double b : ev.beta) os << " " << b;
            best_summary = os.str();
        }

        if (converged) {
            res.converged = true;
            res.iterations = iter;
            res.coeffs = c;
            res.table = std::move(ev.table);
            res.policy = std::move(ev.policy);
            res.alpha = std::move(ev.alpha);
            res.beta = std::move(ev.beta);
            res.objective = ev.objective;
            res.expected_tau = ev.expected_tau;
            res.message = "converged";
            return res;
        }
        if (iter == cfg.max_iter) {
            res.converged = false;
            res.iterations = iter;
            res.coeffs = c;
            res.table = std::move(ev.table);
            res.policy = std::move(ev.policy);
            res.alpha = std::move(ev.alpha);
            res.beta = std::move(ev.beta);
            res.objective = ev.objective;
            res.expected_tau = ev.expected_tau;
            res.message = "iteration cap reached without convergence; the horizon may be too "
                          "short for the requested constraints. " + best_summary;
            return res;
        }

        std::vector<double> grad(static_cast<std::size_t>(2 * M));
        for (int m = 0; m < M; ++m) {
            const auto mu = static_cast<std::size_t>(m);
            grad[mu] = priors[mu] * (ev.alpha[mu] - constraints.alpha_bar[mu]);
            grad[static_cast<std::size_t>(M) + mu] =
                priors[mu] * (ev.beta[mu] - constraints.beta_bar[mu]);
        }
        if (cfg.tie_mirrored) {
            for (int m = 0; m < M / 2; ++m) {
                const auto a = static_cast<std::size_t>(m);
                const auto b = static_cast<std::size_t>(M - 1 - m);
                const double gl = 0.5 * (grad[a] + grad[b]);
                grad[a] = grad[b] = gl;
                const double gm = 0.5 * (grad[static_cast<std::size_t>(M) + a] +
                                         grad[static_cast<std::size_t>(M) + b]);
                grad[static_cast<std::size_t>(M) + a] = grad[static_cast<std::size_t>(M) + b] = gm;
            }
        }
        for (int m = 0; m < M; ++m) {
            const auto mu = static_cast<std::size_t>(m);
            c.lambda[mu] = std::max(0.0, c.lambda[mu] + cfg.gamma * scale[mu] * grad[mu]);
            c.mu[mu] = std::max(0.0, c.mu[mu] + cfg.gamma * scale[static_cast<std::size_t>(M) + mu] *
                                                    grad[static_cast<std::size_t>(M) + mu]);
        }
    }
    return res;  // unreachable
}

}  // namespace sequest
