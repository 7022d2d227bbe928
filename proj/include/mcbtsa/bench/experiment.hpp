#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcbtsa/algorithm/run.hpp"
#include "mcbtsa/bench/io.hpp"
#include "mcbtsa/bench/synthetic.hpp"
#include "mcbtsa/gep/types.hpp"

namespace mcbtsa::bench {

/// Multiplies each selected cell by an independent U[lo, hi] factor and
/// re-clips capacity factors to [0, 1]. Columns are "F_<generator>", "D" or
/// "price"; unknown names raise ValidationError.
gep::TimeSeriesTable perturb(const gep::TimeSeriesTable& ts, const gep::SystemSpec& spec,
                             const std::vector<std::string>& columns, double lo, double hi, std::uint64_t seed);

struct SyntheticSource {
    std::size_t horizon = 8736;
    std::uint64_t seed = 1;
    SyntheticProfile profile;
};

inline constexpr const char* kExperimentSchema = "mcbtsa.experiment/1";

struct ExperimentConfig {
    gep::SystemSpec system = default_system();
    std::optional<std::filesystem::path> timeseries_file;
    SyntheticSource synthetic;  ///< used when timeseries_file is empty
    /// Multiply investment costs and the budget by delta*T/8736.
    bool scale_investment_to_horizon = true;
    std::vector<algorithm::Method> methods{algorithm::Method::Mcb};
    std::size_t scenarios = 10;
    double noise_lo = 0.8;
    double noise_hi = 1.2;
    std::vector<std::string> perturbed_columns;  ///< empty: every VRE factor
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "bench_out";
    algorithm::AlgorithmConfig algorithm;
    unsigned workers = 1;

    void validate() const;
};

/// Parses the versioned JSON config; relative file paths resolve against base_dir.
ExperimentConfig experiment_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json experiment_to_json(const ExperimentConfig& config);

/// System and inputs after scaling, before perturbation.
struct Instance {
    gep::SystemSpec spec;
    gep::TimeSeriesTable ts;
};
Instance load_instance(const ExperimentConfig& config);

struct FullReference {
    double objective = 0.0;
    std::vector<double> x;
    std::size_t lp_iterations = 0;
    double seconds = 0.0;
};

struct MethodOutcome {
    algorithm::Method method = algorithm::Method::Mcb;
    std::size_t scenario = 0;  ///< 1-based
    bool ok = false;
    std::string error;
    std::optional<algorithm::RunResult> run;
    double final_eps = 0.0;
    std::optional<double> vre_error;      ///< percent; empty when the reference builds none
    std::optional<double> thermal_error;
    double seconds = 0.0;
    double time_ratio = 0.0;              ///< method wall-clock / full-scale wall-clock
};

struct ScenarioOutcome {
    std::size_t scenario = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    FullReference full;
};

struct BenchmarkReport {
    std::vector<ScenarioOutcome> scenarios;
    std::vector<MethodOutcome> outcomes;  ///< method-major, scenario-minor

    bool complete() const;
};

/// Per-scenario seed: master seed hashed with the scenario index.
std::uint64_t scenario_seed(std::uint64_t master, std::size_t scenario);

/// Runs every (method, scenario) pair and writes iterations_<method>_<s>.csv,
/// convergence_<method>.csv (scenario 1), results.csv, timings.csv and
/// report.json into config.output_dir. report.json and results.csv hold no
/// wall-clock values and are reproducible byte for byte.
BenchmarkReport run_benchmark(const ExperimentConfig& config);

/// R,f_LB,f_UB per iteration.
void emit_convergence_plotdata(const algorithm::RunResult& run, const std::filesystem::path& path);

nlohmann::json report_to_json(const ExperimentConfig& config, const BenchmarkReport& report);

/// Linear-interpolated quantile of a non-empty sample.
double quantile(std::vector<double> values, double q);

}  // namespace mcbtsa::bench
