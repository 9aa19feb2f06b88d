#include "sequest/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace sequest {

namespace {

struct RowEntry {
    std::uint32_t col;
    double val;
};

void spmv(const LpProblem& lp, const std::vector<double>& v, std::vector<double>& out) {
    const std::size_t rows = lp.rows();
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t k = lp.row_ptr[r]; k < lp.row_ptr[r + 1]; ++k)
            s += lp.val[k] * v[lp.col[k]];
        out[r] = s;
    }
}

void spmv_t(const LpProblem& lp, const std::vector<double>& y, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t rows = lp.rows();
    for (std::size_t r = 0; r < rows; ++r) {
        const double yr = y[r];
        if (yr == 0.0) continue;
        for (std::size_t k = lp.row_ptr[r]; k < lp.row_ptr[r + 1]; ++k)
            out[lp.col[k]] += lp.val[k] * yr;
    }
}

struct Kkt {
    double primal = 0.0, dual = 0.0, gap = 0.0;
    double worst() const { return std::max(primal, std::max(dual, gap)); }
};

Kkt kkt_residuals(const LpProblem& lp, const std::vector<double>& v, const std::vector<double>& y,
                  std::vector<double>& scratch_rows, std::vector<double>& scratch_vars) {
    Kkt k;
    spmv(lp, v, scratch_rows);
    double hnorm = 1.0, cnorm = 1.0;
    for (double h : lp.rhs) hnorm = std::max(hnorm, std::abs(h));
    for (double c : lp.objective) cnorm = std::max(cnorm, std::abs(c));
    for (std::size_t r = 0; r < lp.rows(); ++r)
        k.primal = std::max(k.primal, (scratch_rows[r] - lp.rhs[r]) / hnorm);
    k.primal = std::max(k.primal, 0.0);
    spmv_t(lp, y, scratch_vars);
    for (std::size_t j = 0; j < lp.num_vars; ++j)
        k.dual = std::max(k.dual, (lp.objective[j] - scratch_vars[j]) / cnorm);
    k.dual = std::max(k.dual, 0.0);
    double cv = 0.0, hy = 0.0;
    for (std::size_t j = 0; j < lp.num_vars; ++j) cv += lp.objective[j] * v[j];
    for (std::size_t r = 0; r < lp.rows(); ++r) hy += lp.rhs[r] * y[r];
    k.gap = std::abs(cv - hy) / (1.0 + std::abs(cv) + std::abs(hy));
    return k;
}

}  // namespace

std::string LpProblem::var_name(std::size_t idx) const {
    char buf[48];
    if (idx < num_rho) {
        const std::size_t nodes = grid.size();
        std::snprintf(buf, sizeof buf, "rho_%zu_%zu", idx / nodes, idx % nodes);
    } else if (idx < num_rho + static_cast<std::size_t>(M)) {
        std::snprintf(buf, sizeof buf, "lam_%zu", idx - num_rho + 1);
    } else {
        std::snprintf(buf, sizeof buf, "mu_%zu", idx - num_rho - static_cast<std::size_t>(M) + 1);
    }
    return buf;
}

LpProblem build_lp(const Model& model, const StageTables& tables, const ConstraintSpec& constraints,
                   double epsilon, const LpBuildLimits& limits, unsigned threads) {
    const int M = tables.M;
    const int N = tables.N;
    constraints.validate(M);
    const std::size_t nodes = tables.nodes();
    const auto& priors = model.hypotheses().prior;

    LpProblem lp;
    lp.M = M;
    lp.N = N;
    lp.grid = tables.grid;
    lp.num_rho = static_cast<std::size_t>(N + 1) * nodes;
    lp.num_vars = lp.num_rho + 2 * static_cast<std::size_t>(M);
    lp.epsilon = epsilon;
    lp.stop_rows = static_cast<std::size_t>(N + 1) * nodes * static_cast<std::size_t>(M);
    lp.cont_rows = static_cast<std::size_t>(N) * nodes;

    // Size guard before assembling the continuation rows.
    const auto dom = model.observation_domain();
    const std::size_t est_nnz = lp.stop_rows * (static_cast<std::size_t>(M) + 1) +
                                lp.cont_rows * (std::min(nodes, dom.nodes().size()) + 1);
    if (est_nnz > limits.max_nonzeros)
        throw Error("lp build: estimated " + std::to_string(est_nnz) + " nonzeros over " +
                    std::to_string(lp.stop_rows + lp.cont_rows) + " rows and " +
                    std::to_string(lp.num_vars) + " variables exceeds the memory budget");

    // Objective: interpolation weights of the initial state on stage-0 rho,
    // the constraint terms on the coefficients, and the epsilon stabilizer.
    lp.objective.assign(lp.num_vars, 0.0);
    {
        const auto s0 = model.initial_state();
        const auto& ax = tables.grid.axes[0];
        if (tables.grid.dim() == 1) {
            const auto [k, a] = ax.locate(s0.t1);
            lp.objective[lp.rho_index(0, static_cast<std::size_t>(k))] += 1.0 - a;
            lp.objective[lp.rho_index(0, static_cast<std::size_t>(k) + 1)] += a;
        } else {
            const auto& ay = tables.grid.axes[1];
            const auto [kx, a] = ax.locate(s0.t1);
            const auto [ky, b] = ay.locate(s0.t2);
            const std::size_t n1 = static_cast<std::size_t>(ay.count);
            const std::size_t base = static_cast<std::size_t>(kx) * n1 + static_cast<std::size_t>(ky);
            lp.objective[lp.rho_index(0, base)] += (1.0 - a) * (1.0 - b);
            lp.objective[lp.rho_index(0, base + 1)] += (1.0 - a) * b;
            lp.objective[lp.rho_index(0, base + n1)] += a * (1.0 - b);
            lp.objective[lp.rho_index(0, base + n1 + 1)] += a * b;
        }
        for (int m = 0; m < M; ++m) {
            const auto mu = static_cast<std::size_t>(m);
            lp.objective[lp.lambda_index(m)] = -priors[mu] * constraints.alpha_bar[mu];
            lp.objective[lp.mu_index(m)] = -priors[mu] * constraints.beta_bar[mu];
        }
        const double reg = epsilon / static_cast<double>(lp.num_rho);
        for (std::size_t j = 0; j < lp.num_rho; ++j) lp.objective[j] -= reg;
    }

    lp.row_ptr.reserve(lp.stop_rows + lp.cont_rows + 1);
    lp.row_ptr.push_back(0);

    // Stopping rows: rho_{n,i} - mu_m p_m var_m - sum_{j != m} lambda_j p_j <= 0.
    for (int n = 0; n <= N; ++n) {
        for (std::size_t i = 0; i < nodes; ++i) {
            for (int m = 0; m < M; ++m) {
                lp.col.push_back(static_cast<std::uint32_t>(lp.rho_index(n, i)));
                lp.val.push_back(1.0);
                for (int j = 0; j < M; ++j) {
                    if (j == m) continue;
                    const double p = tables.post_prob[tables.offset(n, j) + i];
                    lp.col.push_back(static_cast<std::uint32_t>(lp.lambda_index(j)));
                    lp.val.push_back(-p);
                }
                const std::size_t off = tables.offset(n, m) + i;
                lp.col.push_back(static_cast<std::uint32_t>(lp.mu_index(m)));
                lp.val.push_back(-tables.post_prob[off] * tables.var[off]);
                lp.rhs.push_back(0.0);
                lp.row_ptr.push_back(lp.col.size());
            }
        }
    }

    // Continuation rows: rho_{n,i} - sum_k W_k rho_{n+1,k} <= 1 with W the
    // renormalized marginal predictive pushed through the transition kernel
    // and the interpolation stencil.
    const auto xs = dom.nodes();
    const auto xw = dom.weights();
    const std::size_t nx = xs.size();
    std::vector<std::vector<RowEntry>> cont(static_cast<std::size_t>(N) * nodes);
    parallel_for(cont.size(), threads, [&](std::size_t b, std::size_t e) {
        std::vector<double> cond(static_cast<std::size_t>(M) * nx);
        std::vector<double> tr1(nx), tr2(nx);
        std::vector<double> dense(nodes, 0.0);
        std::vector<std::size_t> touched;
        touched.reserve(4 * nx);
        for (std::size_t row = b; row < e; ++row) {
            const int n = static_cast<int>(row / nodes);
            const std::size_t i = row % nodes;
            const auto pt = tables.grid.point(i);
            const StatisticState s{n, pt[0], pt[1]};
            model.conditional_rows(tables, s, xs, cond.data());
            model.transition_row(s, xs, tr1.data(), tr2.data());
            touched.clear();
            double mass = 0.0;
            auto scatter = [&](std::size_t node, double w) {
                if (w == 0.0) return;
                if (dense[node] == 0.0) touched.push_back(node);
                dense[node] += w;
            };
            for (std::size_t j = 0; j < nx; ++j) {
                double p = 0.0;
                for (int m = 0; m < M; ++m)
                    p += tables.post_prob[tables.offset(n, m) + i] *
                         cond[static_cast<std::size_t>(m) * nx + j];
                const double wp = xw[j] * p;
                mass += wp;
                if (tables.grid.dim() == 1) {
                    const auto [k, a] = tables.grid.axes[0].locate(tr1[j]);
                    scatter(static_cast<std::size_t>(k), wp * (1.0 - a));
                    scatter(static_cast<std::size_t>(k) + 1, wp * a);
                } else {
                    const auto [kx, a] = tables.grid.axes[0].locate(tr1[j]);
                    const auto [ky, bb] = tables.grid.axes[1].locate(tr2[j]);
                    const std::size_t n1 = static_cast<std::size_t>(tables.grid.axes[1].count);
                    const std::size_t base =
                        static_cast<std::size_t>(kx) * n1 + static_cast<std::size_t>(ky);
                    scatter(base, wp * (1.0 - a) * (1.0 - bb));
                    scatter(base + 1, wp * (1.0 - a) * bb);
                    scatter(base + n1, wp * a * (1.0 - bb));
                    scatter(base + n1 + 1, wp * a * bb);
                }
            }
            if (!(mass > 0.0) || !std::isfinite(mass))
                throw SolverError("lp build: degenerate predictive density in a continuation row");
            auto& out = cont[row];
            out.reserve(touched.size() + 1);
            std::sort(touched.begin(), touched.end());
            for (std::size_t node : touched) {
                out.push_back({static_cast<std::uint32_t>(lp.rho_index(n + 1, node)),
                               -dense[node] / mass});
                dense[node] = 0.0;
            }
        }
    });
    for (std::size_t row = 0; row < cont.size(); ++row) {
        const int n = static_cast<int>(row / nodes);
        const std::size_t i = row % nodes;
        lp.col.push_back(static_cast<std::uint32_t>(lp.rho_index(n, i)));
        lp.val.push_back(1.0);
        for (const auto& en : cont[row]) {
            lp.col.push_back(en.col);
            lp.val.push_back(en.val);
        }
        lp.rhs.push_back(1.0);
        lp.row_ptr.push_back(lp.col.size());
    }

    if (lp.col.size() > limits.max_nonzeros)
        throw Error("lp build: " + std::to_string(lp.col.size()) +
                    " nonzeros exceed the memory budget");
    return lp;
}

LpSolution solve_lp(const LpProblem& lp, const PdhgOptions& opts) {
    const std::size_t rows = lp.rows();
    const std::size_t vars = lp.num_vars;

    // Diagonal preconditioning (Pock--Chambolle, alpha = 1).
    std::vector<double> sigma(rows, 0.0), tau(vars, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = lp.row_ptr[r]; k < lp.row_ptr[r + 1]; ++k) {
            sigma[r] += std::abs(lp.val[k]);
            tau[lp.col[k]] += std::abs(lp.val[k]);
        }
    for (auto& s : sigma) s = s > 0.0 ? 0.9 / s : 1.0;
    for (auto& t : tau) t = t > 0.0 ? 0.9 / t : 1.0;

    std::vector<double> v(vars, 0.0), y(rows, 0.0);
    std::vector<double> v_bar(vars, 0.0), gty(vars, 0.0), gv(rows, 0.0);
    std::vector<double> v_avg(vars, 0.0), y_avg(rows, 0.0);
    std::vector<double> scratch_rows(rows), scratch_vars(vars);
    double avg_weight = 0.0;

    LpSolution sol;
    sol.status = "iteration_limit";

    std::size_t it = 0;
    for (; it < opts.max_iters; ++it) {
        // v step (gradient ascent on the maximization objective).
        spmv_t(lp, y, gty);
        for (std::size_t j = 0; j < vars; ++j) {
            const double nv = v[j] + tau[j] * (lp.objective[j] - gty[j]);
            v_bar[j] = 2.0 * std::max(0.0, nv) - v[j];
            v[j] = std::max(0.0, nv);
        }
        spmv(lp, v_bar, gv);
        for (std::size_t r = 0; r < rows; ++r)
            y[r] = std::max(0.0, y[r] + sigma[r] * (gv[r] - lp.rhs[r]));

        for (std::size_t j = 0; j < vars; ++j) v_avg[j] += v[j];
        for (std::size_t r = 0; r < rows; ++r) y_avg[r] += y[r];
        avg_weight += 1.0;

        if ((it + 1) % opts.check_every == 0) {
            const auto cur = kkt_residuals(lp, v, y, scratch_rows, scratch_vars);
            if (cur.worst() <= opts.tol) {
                sol.status = "optimal";
                ++it;
                break;
            }
            // Averaging restart: adopt the ergodic average when it is better.
            std::vector<double> va(vars), ya(rows);
            for (std::size_t j = 0; j < vars; ++j) va[j] = v_avg[j] / avg_weight;
            for (std::size_t r = 0; r < rows; ++r) ya[r] = y_avg[r] / avg_weight;
            const auto avg = kkt_residuals(lp, va, ya, scratch_rows, scratch_vars);
            if (avg.worst() < cur.worst()) {
                v = va;
                y = ya;
                if (avg.worst() <= opts.tol) {
                    sol.status = "optimal";
                    ++it;
                    break;
                }
            }
            std::fill(v_avg.begin(), v_avg.end(), 0.0);
            std::fill(y_avg.begin(), y_avg.end(), 0.0);
            avg_weight = 0.0;
        }
    }

    const auto fin = kkt_residuals(lp, v, y, scratch_rows, scratch_vars);
    sol.primal_residual = fin.primal;
    sol.dual_residual = fin.dual;
    sol.gap = fin.gap;
    sol.iterations = it;
    sol.objective = 0.0;
    for (std::size_t j = 0; j < vars; ++j) sol.objective += lp.objective[j] * v[j];
    sol.rho.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lp.num_rho));
    sol.coeffs.lambda.resize(static_cast<std::size_t>(lp.M));
    sol.coeffs.mu.resize(static_cast<std::size_t>(lp.M));
    for (int m = 0; m < lp.M; ++m) {
        sol.coeffs.lambda[static_cast<std::size_t>(m)] = v[lp.lambda_index(m)];
        sol.coeffs.mu[static_cast<std::size_t>(m)] = v[lp.mu_index(m)];
    }
    return sol;
}

void export_lp_text(const LpProblem& lp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("lp export: cannot open " + path);
    char buf[64];
    auto num = [&buf](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    out << "\\ sequential design LP\nMaximize\n obj:";
    std::size_t on_line = 0;
    for (std::size_t j = 0; j < lp.num_vars; ++j) {
        if (lp.objective[j] == 0.0) continue;
        out << (lp.objective[j] >= 0.0 ? " + " : " - ") << num(std::abs(lp.objective[j])) << " "
            << lp.var_name(j);
        if (++on_line % 6 == 0) out << "\n    ";
    }
    out << "\nSubject To\n";
    const std::size_t nodes = lp.grid.size();
    for (std::size_t r = 0; r < lp.rows(); ++r) {
        if (r < lp.stop_rows) {
            const std::size_t n = r / (nodes * static_cast<std::size_t>(lp.M));
            const std::size_t rem = r % (nodes * static_cast<std::size_t>(lp.M));
            out << " stop_" << n << "_" << rem / static_cast<std::size_t>(lp.M) << "_"
                << rem % static_cast<std::size_t>(lp.M) + 1 << ":";
        } else {
            const std::size_t rr = r - lp.stop_rows;
            out << " cont_" << rr / nodes << "_" << rr % nodes << ":";
        }
        on_line = 0;
        for (std::size_t k = lp.row_ptr[r]; k < lp.row_ptr[r + 1]; ++k) {
            out << (lp.val[k] >= 0.0 ? " + " : " - ") << num(std::abs(lp.val[k])) << " "
                << lp.var_name(lp.col[k]);
            if (++on_line % 6 == 0) out << "\n    ";
        }
        out << " <= " << num(lp.rhs[r]) << "\n";
    }
    out << "Bounds\n";  // default bounds x >= 0 match the problem; listed for clarity
    for (std::size_t j = lp.num_rho; j < lp.num_vars; ++j)
        out << " " << lp.var_name(j) << " >= 0\n";
    out << "End\n";
    if (!out) throw Error("lp export: write failed for " + path);
}

LpVerification verify_lp_solution(const Model& model, const StageTables& tables,
                                  const LpSolution& sol, double tol, const SolverOptions& opts) {
    const auto table = backward_induction(model, tables, sol.coeffs, opts);
    const std::size_t nodes = tables.nodes();
    LpVerification out;
    for (int n = 0; n <= tables.N; ++n) {
        const auto& ref = table.rho[static_cast<std::size_t>(n)];
        for (std::size_t i = 0; i < nodes; ++i) {
            const double lp_rho = sol.rho[static_cast<std::size_t>(n) * nodes + i];
            const double dev = std::abs(lp_rho - ref[i]) / (1.0 + std::abs(ref[i]));
            out.max_deviation = std::max(out.max_deviation, dev);
        }
    }
    out.ok = out.max_deviation <= tol;
    return out;
}

}  // namespace sequest
