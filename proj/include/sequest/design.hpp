#pragma once

#include "sequest/performance.hpp"

namespace sequest {

struct ConstraintSpec {
    std::vector<double> alpha_bar;  // detection-error bounds, in (0,1)
    std::vector<double> beta_bar;   // MSE bounds, > 0

    void validate(int M) const;
};

struct PgaConfig {
    enum class GradientMode { GridRecursion, MonteCarlo };

    double gamma = 1000.0;
    /// Optional per-coefficient step scaling (length 2M, lambda first).
    std::vector<double> gamma_scale;
    double tol_alpha = 1e-3;
    double tol_beta = 5e-3;
    int max_iter = 200;
    GradientMode gradient_mode = GradientMode::GridRecursion;
    std::uint64_t mc_runs = 100000;  // per hypothesis and evaluation
    std::uint64_t mc_seed = 1;
    /// Average gradient components over mirrored hypothesis pairs so tied
    /// coefficients stay tied (symmetric models).
    bool tie_mirrored = false;
};

struct PgaIterate {
    int iter = 0;
    CostCoefficients coeffs;
    std::vector<double> alpha, beta;
    double objective = 0.0;
};

struct PgaResult {
    bool converged = false;
    int iterations = 0;
    CostCoefficients coeffs;
    CostTable table;
    Policy policy;
    std::vector<double> alpha, beta;  // errors achieved at coeffs
    double objective = 0.0;           // dual objective L at coeffs
    double expected_tau = 0.0;        // run-length identity with achieved errors
    std::vector<PgaIterate> trace;
    std::string message;
};

/// Algorithm: iterate c <- max(c + gamma * grad L(c), 0) until, per
/// coefficient, either the coefficient is zero with a nonpositive gradient or
/// the matching error is within tolerance of its bound.
PgaResult projected_gradient_ascent(const Model& model, const StageTables& tables,
                                    const ConstraintSpec& constraints,
                                    const CostCoefficients& init, const PgaConfig& cfg,
                                    const SolverOptions& solver_opts = {});

}  // namespace sequest
