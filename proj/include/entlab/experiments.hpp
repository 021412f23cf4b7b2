#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace entlab {

enum class Experiment {
    schuett_regimes,
    partition_stress,
    hardy_consistency,
    critical_scaling_power,
    critical_scaling_log,
    certificate_growth,
    kuhn_consistency,
};

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);
const std::vector<Experiment>& all_experiments();

/// Default parameters of an experiment; also the list of accepted keys.
nlohmann::json default_params(Experiment e);

struct ExperimentConfig {
    Experiment experiment = Experiment::schuett_regimes;
    nlohmann::json params = nlohmann::json::object();  // resolved: defaults overlaid with user values
    std::uint64_t seed = 0;
    std::string output_dir = "out";
};

/// Reads {"experiment", "params", "seed", "output_dir"} (all optional except
/// experiment, which may come from `experiment_override`). Unknown keys, at
/// the top level or inside params, are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::optional<std::string>& experiment_override = {});

nlohmann::json to_json(const ExperimentConfig& cfg);

struct CsvRow {
    double n_or_k = 0.0;
    std::optional<double> lower, upper, heuristic, reference, ratio;
};

/// n_or_k,lower,upper,heuristic,reference,ratio
std::string csv_header();
std::string csv_line(const CsvRow& row);
std::string csv_body(const std::vector<CsvRow>& rows);

struct Check {
    std::string name;
    bool pass = false;
    bool invariant = false;  // failure counts as an invariant violation
    std::string detail;
};

struct ExperimentResult {
    std::vector<CsvRow> rows;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<Check> checks;
    std::string status = "ok";  // ok, resource_exceeded, error

    bool all_pass() const;
    bool invariant_violation() const;
};

/// Wall-clock budget; experiments poll it between units of work.
class Deadline {
public:
    explicit Deadline(double seconds);
    void check(const char* where) const;  // throws ResourceExceeded
    double elapsed_seconds() const;

private:
    std::chrono::steady_clock::time_point start_;
    double seconds_;
};

struct RunLimits {
    double seconds = 600.0;
    std::uint64_t memory_bytes = std::uint64_t{8} << 30;
};

/// Caps the address space of the whole process (setrlimit). Returns false if
/// the limit could not be installed.
bool apply_memory_cap(std::uint64_t bytes);

/// Runs the experiment. Rows gathered before a resource error are kept; the
/// error is recorded in status and summary instead of thrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Deadline& deadline);

/// Writes results.csv, summary.json and manifest.json into cfg.output_dir.
void write_report(const ExperimentConfig& cfg, const ExperimentResult& result, double wall_seconds);

}  // namespace entlab
