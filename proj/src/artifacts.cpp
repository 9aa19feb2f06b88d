#include "sequest/artifacts.hpp"

#include <fstream>

#include <json.hpp>

namespace sequest {

namespace {

using nlohmann::json;

json axis_to_json(const GridAxis& a) { return json{{"lo", a.lo}, {"hi", a.hi}, {"count", a.count}}; }

GridAxis axis_from_json(const json& j) {
    return GridAxis{j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("count").get<int>()};
}

json grid_to_json(const GridSpec& g) {
    json axes = json::array();
    for (const auto& a : g.axes) axes.push_back(axis_to_json(a));
    return json{{"axes", axes}};
}

GridSpec grid_from_json(const json& j) {
    GridSpec g;
    for (const auto& a : j.at("axes")) g.axes.push_back(axis_from_json(a));
    return g;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArtifactError("cannot open " + path + " for writing");
    return out;
}

void emit_number(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    out << buf;
}

}  // namespace

void save_design(const std::string& path, const DesignArtifact& a) {
    json j;
    j["magic"] = "sequest-design";
    j["format_version"] = DesignArtifact::kFormatVersion;
    j["model"] = a.model_name;
    j["config"] = a.config_text;
    j["lambda"] = a.coeffs.lambda;
    j["mu"] = a.coeffs.mu;
    j["alpha"] = a.alpha;
    j["beta"] = a.beta;
    j["objective"] = a.objective;
    j["expected_tau"] = a.expected_tau;
    j["converged"] = a.converged;

    json table;
    table["grid"] = grid_to_json(a.table.grid);
    table["N"] = a.table.N;
    table["rho"] = a.table.rho;
    table["d"] = a.table.d;
    table["g"] = a.table.g;
    table["rho0_init"] = a.table.rho0_init;
    table["d0_init"] = a.table.d0_init;
    table["g0_init"] = a.table.g0_init;
    j["cost_table"] = std::move(table);

    json pol;
    pol["grid"] = grid_to_json(a.policy.grid);
    pol["N"] = a.policy.N;
    pol["M"] = a.policy.M;
    pol["min_samples_one"] = a.policy.min_samples_one;
    pol["stop"] = a.policy.stop;
    pol["decision"] = a.policy.decision;
    pol["estimate"] = a.policy.estimate;
    pol["stop_init"] = a.policy.stop_init;
    pol["decision_init"] = a.policy.decision_init;
    pol["estimate_init"] = a.policy.estimate_init;
    j["policy"] = std::move(pol);

    const auto bytes = json::to_cbor(j);
    auto out = open_out(path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ArtifactError("write failed for " + path);
}

DesignArtifact load_design(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot open artifact " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    json j;
    try {
        j = json::from_cbor(bytes);
    } catch (const std::exception& e) {
        throw ArtifactError("artifact " + path + " is not a valid design file: " + e.what());
    }
    if (j.value("magic", "") != std::string("sequest-design"))
        throw ArtifactError("artifact " + path + " is not a design file");
    if (j.value("format_version", -1) != DesignArtifact::kFormatVersion)
        throw ArtifactError("artifact " + path + " has format version " +
                            std::to_string(j.value("format_version", -1)) + ", expected " +
                            std::to_string(DesignArtifact::kFormatVersion));

    DesignArtifact a;
    a.model_name = j.at("model").get<std::string>();
    a.config_text = j.at("config").get<std::string>();
    a.coeffs.lambda = j.at("lambda").get<std::vector<double>>();
    a.coeffs.mu = j.at("mu").get<std::vector<double>>();
    a.alpha = j.at("alpha").get<std::vector<double>>();
    a.beta = j.at("beta").get<std::vector<double>>();
    a.objective = j.at("objective").get<double>();
    a.expected_tau = j.at("expected_tau").get<double>();
    a.converged = j.at("converged").get<bool>();

    const auto& table = j.at("cost_table");
    a.table.grid = grid_from_json(table.at("grid"));
    a.table.N = table.at("N").get<int>();
    a.table.rho = table.at("rho").get<std::vector<std::vector<double>>>();
    a.table.d = table.at("d").get<std::vector<std::vector<double>>>();
    a.table.g = table.at("g").get<std::vector<std::vector<double>>>();
    a.table.rho0_init = table.at("rho0_init").get<double>();
    a.table.d0_init = table.at("d0_init").get<double>();
    a.table.g0_init = table.at("g0_init").get<double>();

    const auto& pol = j.at("policy");
    a.policy.grid = grid_from_json(pol.at("grid"));
    a.policy.N = pol.at("N").get<int>();
    a.policy.M = pol.at("M").get<int>();
    a.policy.min_samples_one = pol.at("min_samples_one").get<bool>();
    a.policy.stop = pol.at("stop").get<std::vector<std::vector<std::uint8_t>>>();
    a.policy.decision = pol.at("decision").get<std::vector<std::vector<std::int32_t>>>();
    a.policy.estimate = pol.at("estimate").get<std::vector<std::vector<double>>>();
    a.policy.stop_init = pol.at("stop_init").get<std::uint8_t>();
    a.policy.decision_init = pol.at("decision_init").get<std::int32_t>();
    a.policy.estimate_init = pol.at("estimate_init").get<std::vector<double>>();
    return a;
}

void write_report_csv(const std::string& path, const EmpiricalReport& report,
                      const ConstraintSpec* constraints) {
    auto out = open_out(path);
    out << "metric,hypothesis,constraint,estimate,stderr\n";
    for (int m = 0; m < report.M; ++m) {
        const auto mu = static_cast<std::size_t>(m);
        out << "alpha," << m + 1 << ",";
        if (constraints) emit_number(out, constraints->alpha_bar[mu]);
        out << ",";
        emit_number(out, report.alpha_hat[mu]);
        out << ",";
        emit_number(out, report.alpha_se[mu]);
        out << "\n";
    }
    for (int m = 0; m < report.M; ++m) {
        const auto mu = static_cast<std::size_t>(m);
        out << "beta," << m + 1 << ",";
        if (constraints) emit_number(out, constraints->beta_bar[mu]);
        out << ",";
        emit_number(out, report.beta_hat[mu]);
        out << ",";
        emit_number(out, report.beta_se[mu]);
        out << "\n";
    }
    for (int m = 0; m < report.M; ++m) {
        out << "mean_tau," << m + 1 << ",,";
        emit_number(out, report.mean_tau[static_cast<std::size_t>(m)]);
        out << ",\n";
    }
    out << "mean_tau,overall,,";
    emit_number(out, report.overall_tau);
    out << ",";
    emit_number(out, report.overall_tau_se);
    out << "\n";
    out << "boundary_exit_rate,overall,,";
    emit_number(out, report.boundary_exit_rate);
    out << ",\n";
}

void write_report_json(const std::string& path, const EmpiricalReport& report) {
    json j;
    j["runs"] = report.runs;
    j["master_seed"] = report.master_seed;
    j["hypothesis_mode"] = report.hypothesis_mode;
    j["count"] = report.count;
    j["alpha_hat"] = report.alpha_hat;
    j["alpha_se"] = report.alpha_se;
    j["beta_hat"] = report.beta_hat;
    j["beta_se"] = report.beta_se;
    j["mean_tau"] = report.mean_tau;
    j["overall_tau"] = report.overall_tau;
    j["overall_tau_se"] = report.overall_tau_se;
    j["boundary_exit_rate"] = report.boundary_exit_rate;
    j["decision_counts"] = report.decision_counts;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_policy_regions_csv(const std::string& path, const Policy& policy) {
    auto out = open_out(path);
    const bool two_d = policy.grid.dim() == 2;
    out << (two_d ? "n,t1,t2,region\n" : "n,t,region\n");
    const std::size_t nodes = policy.grid.size();
    for (int n = 0; n <= policy.N; ++n) {
        for (std::size_t i = 0; i < nodes; ++i) {
            const auto pt = policy.grid.point(i);
            out << n << ",";
            emit_number(out, pt[0]);
            if (two_d) {
                out << ",";
                emit_number(out, pt[1]);
            }
            if (policy.stop[static_cast<std::size_t>(n)][i] != 0)
                out << ",stop-" << policy.decision[static_cast<std::size_t>(n)][i] + 1 << "\n";
            else
                out << ",continue\n";
        }
    }
}

void write_trace_csv(const std::string& path, const std::vector<PgaIterate>& trace, int M) {
    auto out = open_out(path);
    out << "iter";
    for (int m = 1; m <= M; ++m) out << ",lambda_" << m;
    for (int m = 1; m <= M; ++m) out << ",mu_" << m;
    for (int m = 1; m <= M; ++m) out << ",alpha_" << m;
    for (int m = 1; m <= M; ++m) out << ",beta_" << m;
    out << ",L\n";
    for (const auto& row : trace) {
        out << row.iter;
        for (double v : row.coeffs.lambda) {
            out << ",";
            emit_number(out, v);
        }
        for (double v : row.coeffs.mu) {
            out << ",";
            emit_number(out, v);
        }
        for (double v : row.alpha) {
            out << ",";
            emit_number(out, v);
        }
        for (double v : row.beta) {
            out << ",";
            emit_number(out, v);
        }
        out << ",";
        emit_number(out, row.objective);
        out << "\n";
    }
}

void write_performance_csv(const std::string& path, const PerformanceTable& perf) {
    auto out = open_out(path);
    const bool two_d = perf.grid.dim() == 2;
    out << (two_d ? "n,t1,t2" : "n,t");
    for (int m = 1; m <= perf.M; ++m) out << ",alpha_" << m;
    for (int m = 1; m <= perf.M; ++m) out << ",beta_" << m;
    out << "\n";
    const std::size_t nodes = perf.grid.size();
    for (int n = 0; n <= perf.N; ++n) {
        for (std::size_t i = 0; i < nodes; ++i) {
            const auto pt = perf.grid.point(i);
            out << n << ",";
            emit_number(out, pt[0]);
            if (two_d) {
                out << ",";
                emit_number(out, pt[1]);
            }
            for (int m = 0; m < perf.M; ++m) {
                out << ",";
                emit_number(out, perf.alpha[static_cast<std::size_t>(n)]
                                      [static_cast<std::size_t>(m) * nodes + i]);
            }
            for (int m = 0; m < perf.M; ++m) {
                out << ",";
                emit_number(out, perf.beta[static_cast<std::size_t>(n)]
                                     [static_cast<std::size_t>(m) * nodes + i]);
            }
            out << "\n";
        }
    }
}

}  // namespace sequest
