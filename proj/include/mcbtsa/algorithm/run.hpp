#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcbtsa/error.hpp"
#include "mcbtsa/gep/types.hpp"
#include "mcbtsa/lp/solver.hpp"
#include "mcbtsa/tsa/clustering.hpp"

namespace mcbtsa::algorithm {

enum class Method { Mcb, InputChc, KMedoidsNetDemand, KMedoidsInput };

std::string to_string(Method m);
/// "MCB", "input-CHC", "kmedoids-net-demand", "kmedoids-input".
Method parse_method(const std::string& name);

struct AlgorithmConfig {
    std::size_t r0 = 400;
    std::size_t delta_r = 100;
    std::size_t r_max = 900;
    double eps_target = 1.0;  ///< percent
    std::size_t k = 500;
    std::size_t n_top = 100;
    std::uint64_t seed = 0;
    Method method = Method::Mcb;
    /// R counts the protected singletons too; otherwise R is the clustered count.
    bool count_protected_in_r = false;
    int trees = 100;
    int max_depth = 20;
    unsigned threads = 1;
    lp::SolverOptions solver;

    void validate() const;
};

struct IterationRecord {
    std::size_t iteration = 0;     ///< 1-based
    std::size_t r = 0;             ///< loop variable R
    std::size_t r_clustered = 0;   ///< groups produced by clustering
    std::size_t r_total = 0;       ///< representatives in the solved model
    double f_lb = 0.0;
    double f_ub = 0.0;
    double eps = 0.0;              ///< percent
    bool nonpositive_ub = false;   ///< gap formula applied to f_UB <= 0
    double t_agg = 0.0;            ///< seconds
    double t_ub = 0.0;
    std::size_t lp_iterations_agg = 0;
    std::size_t lp_iterations_ub = 0;
    std::vector<double> x_hat;
};

enum class Termination { GapMet, RExhausted, Aborted };
std::string to_string(Termination t);

struct RunResult {
    Method method = Method::Mcb;
    std::vector<IterationRecord> iterations;
    Termination termination = Termination::Aborted;
    std::optional<gep::MarginalCostSeries> mu_bar;
    std::vector<double> x_tilde;
    tsa::ProtectedSet protected_steps;
    gep::Aggregation final_aggregation;
    double t_features = 0.0;  ///< seconds spent on estimation / features
};

/// A stage failed; carries the iterations completed so far and the cause.
class RunAborted : public Error {
public:
    RunAborted(RunResult partial, std::exception_ptr cause, const std::string& what);
    const RunResult& partial() const { return partial_; }
    std::exception_ptr cause() const { return cause_; }

private:
    RunResult partial_;
    std::exception_ptr cause_;
};

struct Bounds {
    double f_lb = 0.0;
    double f_ub = 0.0;
    std::vector<double> x_hat;
    double t_agg = 0.0;
    double t_ub = 0.0;
    std::size_t lp_iterations_agg = 0;
    std::size_t lp_iterations_ub = 0;
};

/// Aggregated solve (lower bound) and dispatch with its capacities (upper bound).
Bounds compute_bounds(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts, const gep::Aggregation& agg,
                      const lp::SolverOptions& options = {});

/// 100 (f_ub - f_lb) / f_ub; throws UndefinedGapError when f_ub == 0.
double gap(double f_lb, double f_ub);

struct MethodFeatures {
    tsa::FeatureSeries features;
    std::vector<double> x_tilde;  ///< capacities used for the net-demand ranking
    std::optional<gep::MarginalCostSeries> mu_bar;
};

/// Clustering features of a method: the estimator's marginal costs for MCB,
/// z-scored inputs for input-CHC and kmedoids-input, and estimator-based net
/// demand for kmedoids-net-demand. x_tilde is zero for input-only methods.
MethodFeatures method_features(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts,
                               const AlgorithmConfig& config);

/// One clustering step of the loop at loop value R; iteration selects the
/// k-medoids seed stream exactly as inside run.
gep::Aggregation aggregate_at(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts,
                              const AlgorithmConfig& config, const MethodFeatures& features, std::size_t r,
                              std::size_t iteration = 1, tsa::ProtectedSet* protected_steps = nullptr);

/// The aggregation loop with the method's features.
RunResult run(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts, const AlgorithmConfig& config);

/// The aggregation loop with caller-provided features and capacities.
RunResult run_with_features(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts,
                            const AlgorithmConfig& config, const MethodFeatures& features);

nlohmann::json to_json(const RunResult& result);
/// iteration,R,f_LB,f_UB,eps_percent,t_agg_s,t_ub_s,R_total
void write_iterations_csv(std::ostream& out, const RunResult& result);

/// Shortest decimal that round-trips, fixed notation.
std::string format_fixed(double v);

}  // namespace mcbtsa::algorithm
