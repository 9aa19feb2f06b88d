#pragma once

#include "sequest/design.hpp"

namespace sequest {

/// Sparse LP realization of the relaxed design problem:
///   maximize  rho_0(t_0) - sum_m p(H_m)(lambda_m alpha_bar_m + mu_m beta_bar_m)
///   s.t.      rho_n <= D*_{m,n}           (stopping rows)
///             rho_n <= 1 + E[rho_{n+1}]   (continuation rows)
/// with one rho variable per (stage, grid node) plus the 2M coefficients,
/// everything lower-bounded by zero. Rows are stored as G v <= h in CSR form.
struct LpProblem {
    int M = 0;
    int N = 0;
    GridSpec grid;
    std::size_t num_rho = 0;
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> col;
    std::vector<double> val;
    std::vector<double> rhs;
    std::size_t stop_rows = 0;
    std::size_t cont_rows = 0;
    double epsilon = 1e-8;

    std::size_t rows() const { return row_ptr.size() - 1; }
    std::size_t rho_index(int n, std::size_t node) const {
        return static_cast<std::size_t>(n) * grid.size() + node;
    }
    std::size_t lambda_index(int m) const { return num_rho + static_cast<std::size_t>(m); }
    std::size_t mu_index(int m) const {
        return num_rho + static_cast<std::size_t>(M) + static_cast<std::size_t>(m);
    }
    std::string var_name(std::size_t idx) const;
};

struct LpBuildLimits {
    std::size_t max_nonzeros = 80000000;
};

/// epsilon adds the stabilizing term -epsilon * mean(rho) to the objective.
LpProblem build_lp(const Model& model, const StageTables& tables, const ConstraintSpec& constraints,
                   double epsilon = 1e-8, const LpBuildLimits& limits = {}, unsigned threads = 0);

/// First-order (primal-dual hybrid gradient) LP backend with diagonal
/// preconditioning and averaging restarts.
struct PdhgOptions {
    std::size_t max_iters = 2000000;
    double tol = 1e-10;
    std::size_t check_every = 500;
};

struct LpSolution {
    std::string status;  // "optimal" or "iteration_limit"
    double objective = 0.0;
    CostCoefficients coeffs;
    std::vector<double> rho;  // stage-major, aligned with LpProblem::rho_index
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    std::size_t iterations = 0;
};

LpSolution solve_lp(const LpProblem& lp, const PdhgOptions& opts = {});

/// Writes the problem in CPLEX LP text format for external solvers.
void export_lp_text(const LpProblem& lp, const std::string& path);

struct LpVerification {
    bool ok = false;
    double max_deviation = 0.0;  // max |rho_lp - rho_bellman| / (1 + |rho_bellman|)
};

/// Re-solves the Bellman recursion at the LP coefficients and checks that the
/// LP's rho tables agree within tol * (1 + |rho|).
LpVerification verify_lp_solution(const Model& model, const StageTables& tables,
                                  const LpSolution& sol, double tol = 1e-4,
                                  const SolverOptions& opts = {});

}  // namespace sequest
