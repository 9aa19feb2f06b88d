#pragma once

#include "sequest/solver.hpp"

namespace sequest {

/// Detection-error and MSE fields alpha_n^m(t), beta_n^m(t) for a fixed policy,
/// evaluated exactly on the grid, plus their values at the initial state.
struct PerformanceTable {
    GridSpec grid;
    int N = 0;
    int M = 0;
    std::vector<std::vector<double>> alpha;  // [n][m * nodes + node]
    std::vector<std::vector<double>> beta;
    std::vector<double> alpha0, beta0;
};

PerformanceTable error_recursion(const Policy& policy, const Model& model,
                                 const StageTables& tables, unsigned threads = 0);

/// Expected run-length via the dual identity
/// E[tau] = rho_0(t_0) - sum_m p(H_m) (lambda_m alpha_0^m + mu_m beta_0^m).
double expected_runlength(const CostTable& table, const CostCoefficients& coeffs,
                          const std::vector<double>& priors, const PerformanceTable& perf);

/// Gradient of the dual objective, lambda components first.
std::vector<double> design_gradient(const PerformanceTable& perf,
                                    const std::vector<double>& alpha_bar,
                                    const std::vector<double>& beta_bar,
                                    const std::vector<double>& priors);

/// z_n^m = p(t_n|H_m) / p(t_n), computed as the posterior ratio p(H_m|t)/p(H_m).
GridFunction likelihood_ratio_field(const StageTables& tables, int n, int m,
                                    const std::vector<double>& priors);

struct DerivativeCheck {
    int index = 0;   // 0..M-1 lambda, M..2M-1 mu
    bool is_mu = false;
    int hypothesis = 0;
    bool one_sided = false;
    double finite_difference = 0.0;
    double identity = 0.0;  // p(H_m) * alpha_0^m resp. p(H_m) * beta_0^m
    double rel_error = 0.0;
};

/// Central finite differences of rho_0 at the initial state against the
/// performance identity, one row per coefficient. h_rel scales the step by
/// max(1, |coefficient|); zero coefficients use a forward difference.
std::vector<DerivativeCheck> verify_derivative_identity(const Model& model,
                                                        const StageTables& tables,
                                                        const CostCoefficients& coeffs,
                                                        double h_rel = 1e-3,
                                                        const SolverOptions& opts = {});

}  // namespace sequest
