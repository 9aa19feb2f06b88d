#include "sequest/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace sequest {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

GridAxis axis_from(const std::vector<double>& v, const std::string& what) {
    if (v.size() != 3) throw ConfigError(what + ": expected 'lo hi count'");
    GridAxis a{v[0], v[1], static_cast<int>(v[2])};
    a.validate();
    return a;
}

GridSpec grid_from(const std::vector<double>& v, const std::string& what) {
    GridSpec g;
    if (v.size() == 3) {
        g.axes = {axis_from(v, what)};
    } else if (v.size() == 6) {
        g.axes = {axis_from({v[0], v[1], v[2]}, what), axis_from({v[3], v[4], v[5]}, what)};
    } else {
        throw ConfigError(what + ": expected 3 numbers (1-D) or 6 numbers (2-D)");
    }
    return g;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line;
    Section* cur = nullptr;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
            cfg.sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
            cur = &cfg.sections.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        if (cur == nullptr) throw ConfigError("config line " + std::to_string(lineno) +
                                              ": key outside any [section]");
        cur->entries.push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string ConfigFile::serialize() const {
    std::ostringstream out;
    for (const auto& sec : sections) {
        out << "[" << sec.name << "]\n";
        for (const auto& e : sec.entries) out << e.key << " = " << e.value << "\n";
        out << "\n";
    }
    return out.str();
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    for (const auto& sec : sections)
        if (sec.name == section)
            for (const auto& e : sec.entries)
                if (e.key == key) return true;
    return false;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
    for (const auto& sec : sections)
        if (sec.name == section)
            for (const auto& e : sec.entries)
                if (e.key == key) return e.value;
    throw ConfigError("missing config key [" + section + "] " + key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
    const auto s = get(section, key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key [" + section + "] " + key + ": not a number: " + s);
    }
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long long ConfigFile::get_int(const std::string& section, const std::string& key) const {
    const double v = get_double(section, key);
    const auto i = static_cast<long long>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError("config key [" + section + "] " + key + ": expected an integer");
    return i;
}

long long ConfigFile::get_int_or(const std::string& section, const std::string& key,
                                 long long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

bool ConfigFile::get_bool_or(const std::string& section, const std::string& key,
                             bool fallback) const {
    if (!has(section, key)) return fallback;
    auto s = get(section, key);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "off" || s == "no") return false;
    throw ConfigError("config key [" + section + "] " + key + ": expected a boolean");
}

std::vector<double> ConfigFile::get_vector(const std::string& section, const std::string& key) const {
    std::istringstream in(get(section, key));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("config key [" + section + "] " + key + ": not a number: " + tok);
        }
    }
    if (out.empty()) throw ConfigError("config key [" + section + "] " + key + ": empty value");
    return out;
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    ExperimentConfig c;
    c.raw = ConfigFile::parse(text);
    const auto& f = c.raw;

    c.model_type = f.get("model", "type");
    if (c.model_type != "shift-in-mean" && c.model_type != "ask")
        throw ConfigError("unknown model type: " + c.model_type);
    c.horizon = static_cast<int>(f.get_int("model", "horizon"));
    if (f.has("model", "prior")) c.hyp_prior = f.get_vector("model", "prior");

    if (c.model_type == "shift-in-mean") {
        c.sigma2 = f.get_double_or("model", "sigma2", 4.0);
        c.gamma_shape = f.get_double_or("model", "gamma_shape", 1.7);
        c.gamma_scale = f.get_double_or("model", "gamma_scale", 1.0);
        c.gamma_offset = f.get_double_or("model", "gamma_offset", 1.3);
        c.uniform_lo = f.get_double_or("model", "uniform_lo", -1.0);
        c.uniform_hi = f.get_double_or("model", "uniform_hi", 1.0);
        c.mu_grid = axis_from(f.get_vector("grids", "mu"), "grids.mu");
        if (f.has("grids", "mu_coarse"))
            c.mu_grid_coarse = axis_from(f.get_vector("grids", "mu_coarse"), "grids.mu_coarse");
    } else {
        c.symbols = f.get_vector("model", "symbols");
        c.ask_a = f.get_double_or("model", "a", 2.1);
        c.ask_b = f.get_double_or("model", "b", 0.9);
    }

    c.stat_grid = grid_from(f.get_vector("grids", "stat"), "grids.stat");
    if (f.has("grids", "stat_coarse"))
        c.stat_grid_coarse = grid_from(f.get_vector("grids", "stat_coarse"), "grids.stat_coarse");
    c.x_grid = axis_from(f.get_vector("grids", "x"), "grids.x");
    if (f.has("grids", "x_coarse"))
        c.x_grid_coarse = axis_from(f.get_vector("grids", "x_coarse"), "grids.x_coarse");

    c.constraints.alpha_bar = f.get_vector("constraints", "alpha");
    c.constraints.beta_bar = f.get_vector("constraints", "beta");

    const auto method = f.get_or("design", "method", "pga");
    if (method == "lp") {
        c.method = DesignMethod::Lp;
    } else if (method == "pga") {
        c.method = DesignMethod::Pga;
    } else if (method == "lp-then-pga") {
        c.method = DesignMethod::LpThenPga;
    } else {
        throw ConfigError("unknown design method: " + method);
    }
    c.min_samples_one = f.get_int_or("design", "min_samples", 1) >= 1;
    c.exploit_symmetry = f.get_bool_or("design", "symmetry", false);
    c.warmstart = f.get_bool_or("design", "warmstart", false);
    c.warmstart_max_iter = static_cast<int>(f.get_int_or("design", "warmstart_max_iter", 400));

    c.pga.gamma = f.get_double_or("pga", "gamma", 1000.0);
    if (f.has("pga", "gamma_scale")) c.pga.gamma_scale = f.get_vector("pga", "gamma_scale");
    c.pga.tol_alpha = f.get_double_or("pga", "tol_alpha", 1e-3);
    c.pga.tol_beta = f.get_double_or("pga", "tol_beta", 5e-3);
    c.pga.max_iter = static_cast<int>(f.get_int_or("pga", "max_iter", 200));
    const auto grad = f.get_or("pga", "gradient", "grid");
    if (grad == "grid") {
        c.pga.gradient_mode = PgaConfig::GradientMode::GridRecursion;
    } else if (grad == "monte-carlo") {
        c.pga.gradient_mode = PgaConfig::GradientMode::MonteCarlo;
    } else {
        throw ConfigError("unknown pga gradient mode: " + grad);
    }
    c.pga.mc_runs = static_cast<std::uint64_t>(f.get_int_or("pga", "mc_runs", 100000));
    c.pga.tie_mirrored = c.exploit_symmetry;

    c.lp_epsilon = f.get_double_or("lp", "epsilon", 1e-8);
    c.lp_tol = f.get_double_or("lp", "tol", 1e-9);
    c.lp_max_iters = static_cast<std::size_t>(f.get_int_or("lp", "max_iters", 2000000));

    c.mc_runs = static_cast<std::uint64_t>(f.get_int_or("mc", "runs", 100000));
    c.mc_seed = static_cast<std::uint64_t>(f.get_int_or("mc", "seed", 1));
    c.pga.mc_seed = c.mc_seed + 0x5EED;
    c.out_dir = f.get_or("output", "dir", "out");

    if (f.has("verify", "stat"))
        c.verify_stat_grid = grid_from(f.get_vector("verify", "stat"), "verify.stat");
    if (f.has("verify", "x")) c.verify_x_grid = axis_from(f.get_vector("verify", "x"), "verify.x");
    if (f.has("verify", "mu"))
        c.verify_mu_grid = axis_from(f.get_vector("verify", "mu"), "verify.mu");
    c.verify_horizon = static_cast<int>(f.get_int_or("verify", "horizon", 0));
    c.verify_probe_lambda = f.get_double_or("verify", "probe_lambda", 25.0);
    c.verify_probe_mu = f.get_double_or("verify", "probe_mu", 25.0);
    c.verify_fd_tol = f.get_double_or("verify", "fd_tol", 5e-2);

    c.constraints.validate(c.num_hypotheses());
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

int ExperimentConfig::num_hypotheses() const {
    if (!hyp_prior.empty()) return static_cast<int>(hyp_prior.size());
    return model_type == "ask" ? static_cast<int>(symbols.size()) : 3;
}

GridSpec ExperimentConfig::statistic_grid(bool coarse) const {
    if (coarse && stat_grid_coarse) return *stat_grid_coarse;
    return stat_grid;
}

std::unique_ptr<Model> ExperimentConfig::make_model(bool coarse) const {
    if (model_type == "shift-in-mean") {
        ShiftInMeanSpec spec;
        spec.sigma2 = sigma2;
        spec.gamma_shape = gamma_shape;
        spec.gamma_scale = gamma_scale;
        spec.gamma_offset = gamma_offset;
        spec.uniform_lo = uniform_lo;
        spec.uniform_hi = uniform_hi;
        spec.horizon = horizon;
        spec.mu_grid = coarse && mu_grid_coarse ? *mu_grid_coarse : mu_grid;
        spec.x_grid = coarse && x_grid_coarse ? *x_grid_coarse : x_grid;
        const auto& sg = statistic_grid(coarse);
        spec.stat_lo = sg.axes[0].lo;
        spec.stat_hi = sg.axes[0].hi;
        if (!hyp_prior.empty()) spec.hyp_prior = hyp_prior;
        return std::make_unique<ShiftInMeanModel>(std::move(spec));
    }
    AskSpec spec;
    spec.symbols = symbols;
    spec.a = ask_a;
    spec.b = ask_b;
    spec.horizon = horizon;
    spec.x_grid = coarse && x_grid_coarse ? *x_grid_coarse : x_grid;
    if (!hyp_prior.empty()) spec.hyp_prior = hyp_prior;
    return std::make_unique<AskModel>(std::move(spec));
}

int ExperimentConfig::effective_verify_horizon() const {
    return verify_horizon > 0 ? verify_horizon : horizon;
}

GridSpec ExperimentConfig::verify_statistic_grid() const {
    return verify_stat_grid ? *verify_stat_grid : stat_grid;
}

std::unique_ptr<Model> ExperimentConfig::make_verify_model() const {
    if (model_type == "shift-in-mean") {
        ShiftInMeanSpec spec;
        spec.sigma2 = sigma2;
        spec.gamma_shape = gamma_shape;
        spec.gamma_scale = gamma_scale;
        spec.gamma_offset = gamma_offset;
        spec.uniform_lo = uniform_lo;
        spec.uniform_hi = uniform_hi;
        spec.horizon = effective_verify_horizon();
        spec.mu_grid = verify_mu_grid ? *verify_mu_grid : mu_grid;
        spec.x_grid = verify_x_grid ? *verify_x_grid : x_grid;
        const auto sg = verify_statistic_grid();
        spec.stat_lo = sg.axes[0].lo;
        spec.stat_hi = sg.axes[0].hi;
        if (!hyp_prior.empty()) spec.hyp_prior = hyp_prior;
        return std::make_unique<ShiftInMeanModel>(std::move(spec));
    }
    AskSpec spec;
    spec.symbols = symbols;
    spec.a = ask_a;
    spec.b = ask_b;
    spec.horizon = effective_verify_horizon();
    spec.x_grid = verify_x_grid ? *verify_x_grid : x_grid;
    if (!hyp_prior.empty()) spec.hyp_prior = hyp_prior;
    return std::make_unique<AskModel>(std::move(spec));
}

}  // namespace sequest
