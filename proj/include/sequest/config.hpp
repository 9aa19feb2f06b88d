#pragma once

#include <map>
#include <memory>
#include <optional>

#include "sequest/ask_invgamma.hpp"
#include "sequest/design.hpp"
#include "sequest/shift_in_mean.hpp"

namespace sequest {

/// Plain-text config: [section] headers and key = value lines, values are
/// whitespace-separated tokens. Parsing keeps order and raw text so a file
/// re-serializes losslessly.
struct ConfigFile {
    struct Entry {
        std::string key;
        std::string value;
    };
    struct Section {
        std::string name;
        std::vector<Entry> entries;
    };
    std::vector<Section> sections;

    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);
    std::string serialize() const;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key, double fallback) const;
    long long get_int(const std::string& section, const std::string& key) const;
    long long get_int_or(const std::string& section, const std::string& key, long long fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_vector(const std::string& section, const std::string& key) const;
};

enum class DesignMethod { Lp, Pga, LpThenPga };

/// Typed view of an experiment config file.
struct ExperimentConfig {
    ConfigFile raw;

    std::string model_type;  // "shift-in-mean" or "ask"
    int horizon = 0;
    std::vector<double> hyp_prior;  // empty = model default

    // shift-in-mean parameters
    double sigma2 = 4.0;
    double gamma_shape = 1.7, gamma_scale = 1.0, gamma_offset = 1.3;
    double uniform_lo = -1.0, uniform_hi = 1.0;
    GridAxis mu_grid{-16.0, 16.0, 7000};
    std::optional<GridAxis> mu_grid_coarse;

    // ask parameters
    std::vector<double> symbols{-2.0, -1.0, 1.0, 2.0};
    double ask_a = 2.1, ask_b = 0.9;

    GridSpec stat_grid;
    std::optional<GridSpec> stat_grid_coarse;
    GridAxis x_grid{};
    std::optional<GridAxis> x_grid_coarse;

    ConstraintSpec constraints;

    DesignMethod method = DesignMethod::Pga;
    bool min_samples_one = true;
    bool exploit_symmetry = false;
    bool warmstart = false;
    int warmstart_max_iter = 400;

    PgaConfig pga;
    double lp_epsilon = 1e-8;
    double lp_tol = 1e-9;
    std::size_t lp_max_iters = 2000000;

    std::uint64_t mc_runs = 100000;
    std::uint64_t mc_seed = 1;
    std::string out_dir = "out";

    // verify command overrides (smaller grids keep the suite quick)
    std::optional<GridSpec> verify_stat_grid;
    std::optional<GridAxis> verify_x_grid;
    std::optional<GridAxis> verify_mu_grid;
    int verify_horizon = 0;  // 0 = full horizon
    double verify_probe_lambda = 25.0;
    double verify_probe_mu = 25.0;
    double verify_fd_tol = 5e-2;

    static ExperimentConfig from_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);

    int num_hypotheses() const;
    /// Builds the model on the fine (default) or coarse grids.
    std::unique_ptr<Model> make_model(bool coarse = false) const;
    /// Statistic grid matching make_model(coarse).
    GridSpec statistic_grid(bool coarse = false) const;
    /// Model and grids for the verify command (verify overrides if present).
    std::unique_ptr<Model> make_verify_model() const;
    GridSpec verify_statistic_grid() const;
    int effective_verify_horizon() const;
};

}  // namespace sequest
