#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mcbtsa::gep {

struct GeneratorSpec {
    std::string name;
    double c_op = 0.0;   ///< money/MWh
    double c_inv = 0.0;  ///< money/MW
    /// Variable renewable: follows its capacity-factor series. Otherwise the
    /// capacity factor is 1 at every step.
    bool is_vre = false;
};

struct StorageSpec {
    std::string name;
    double eta_c = 1.0;
    double eta_d = 1.0;
    double e_max = 0.0;    ///< MWh
    double e_min = 0.0;    ///< MWh, also the start/end state of charge
    double p_c_max = 0.0;  ///< MW
    double p_d_max = 0.0;  ///< MW
    double c_d = 0.0;      ///< money/MWh discharged
};

struct SystemSpec {
    std::vector<GeneratorSpec> generators;
    std::vector<StorageSpec> storages;
    double c_ns = 0.0;    ///< non-supplied energy penalty, money/MWh
    double budget = 0.0;  ///< investment budget, money
    double delta = 1.0;   ///< hours per step
    bool market_participation = false;

    /// Throws ValidationError on any violated invariant.
    void validate() const;
    std::size_t generator_index(const std::string& name) const;
};

/// Per-step inputs. capacity_factor[g] is indexed like SystemSpec::generators.
struct TimeSeriesTable {
    std::vector<std::vector<double>> capacity_factor;
    std::vector<double> demand;  ///< MWh per step
    std::vector<double> price;   ///< money/MWh

    std::size_t horizon() const { return demand.size(); }

    /// Checks lengths, ranges and, with market participation, price < c_ns.
    void validate(const SystemSpec& spec) const;

    /// F[g][t] with the constant 1 applied to non-VRE generators.
    static double effective_factor(const SystemSpec& spec, const TimeSeriesTable& ts, std::size_t g,
                                   std::size_t t) {
        return spec.generators[g].is_vre ? ts.capacity_factor[g][t] : 1.0;
    }
};

/// How a group's inputs are represented in the aggregated model.
enum class Representation {
    Mean,    ///< arithmetic mean over the group
    Medoid,  ///< values of one member step (k-medoids baseline)
};

/// Ordered partition of the horizon (0-based step indices) into groups.
struct Aggregation {
    std::vector<std::vector<std::size_t>> groups;
    /// Groups that are protected singletons; same length as groups.
    std::vector<bool> is_protected;
    Representation representation = Representation::Mean;
    /// Representative step per group when representation == Medoid.
    std::vector<std::size_t> medoids;

    std::size_t size() const { return groups.size(); }
    std::vector<double> weights() const;

    static Aggregation identity(std::size_t horizon);
    /// Contiguous blocks given by their lengths.
    static Aggregation from_block_lengths(const std::vector<std::size_t>& lengths);

    /// Throws InvalidAggregationError unless the groups partition 0..horizon-1
    /// and every Mean group is a run of consecutive steps.
    void validate(std::size_t horizon) const;
};

/// Decision values of a full-scale or aggregated model. Per-step vectors have
/// the model's horizon K; state of charge carries K+1 entries (index 0 initial).
struct GepSolution {
    std::vector<double> x;                  ///< MW per generator
    std::vector<std::vector<double>> p;     ///< [g][k] MW
    std::vector<std::vector<double>> p_c;   ///< [s][k] MW
    std::vector<std::vector<double>> p_d;   ///< [s][k] MW
    std::vector<std::vector<double>> e;     ///< [s][0..K] MWh
    std::vector<double> e_ns;               ///< MWh
    std::vector<double> o;                  ///< MWh sold
    double objective = 0.0;

    std::size_t horizon() const { return e_ns.size(); }
};

using FullSolution = GepSolution;
using AggregatedSolution = GepSolution;

/// Dual of the energy-balance row per step, money/MWh.
struct MarginalCostSeries {
    std::vector<double> values;

    std::size_t horizon() const { return values.size(); }
};

}  // namespace mcbtsa::gep
