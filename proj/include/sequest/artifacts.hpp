#pragma once

#include "sequest/design.hpp"
#include "sequest/montecarlo.hpp"

namespace sequest {

/// Persisted result of a design run. Serialized as a CBOR-encoded JSON
/// document with a format version; loading rejects unknown versions.
struct DesignArtifact {
    static constexpr int kFormatVersion = 1;

    std::string model_name;
    std::string config_text;
    CostCoefficients coeffs;
    CostTable table;
    Policy policy;
    std::vector<double> alpha, beta;
    double objective = 0.0;
    double expected_tau = 0.0;
    bool converged = false;
};

void save_design(const std::string& path, const DesignArtifact& artifact);
DesignArtifact load_design(const std::string& path);

void write_report_csv(const std::string& path, const EmpiricalReport& report,
                      const ConstraintSpec* constraints = nullptr);
void write_report_json(const std::string& path, const EmpiricalReport& report);

/// Region labels per (stage, grid point): "continue" or "stop-<m>" (1-based).
void write_policy_regions_csv(const std::string& path, const Policy& policy);

void write_trace_csv(const std::string& path, const std::vector<PgaIterate>& trace, int M);

void write_performance_csv(const std::string& path, const PerformanceTable& perf);

}  // namespace sequest
