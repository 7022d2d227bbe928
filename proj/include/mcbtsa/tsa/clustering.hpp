#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcbtsa/gep/types.hpp"

namespace mcbtsa::tsa {

/// Per-step features, column-major: columns[j][t].
struct FeatureSeries {
    std::vector<std::vector<double>> columns;

    std::size_t horizon() const { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t dims() const { return columns.size(); }

    static FeatureSeries single(std::vector<double> values);
    /// Throws ValidationError on ragged or non-finite columns.
    void validate() const;
};

/// Column-wise z-scores (population std); constant columns become 0.
FeatureSeries standardize(const FeatureSeries& features);

/// Steps kept at full resolution, ascending, 0-based.
struct ProtectedSet {
    std::vector<std::size_t> steps;

    std::size_t size() const { return steps.size(); }
};

struct Merge {
    std::size_t left_first = 0;   ///< first step of the left cluster
    std::size_t right_first = 0;  ///< first step of the right cluster
    std::size_t left_size = 0;
    std::size_t right_size = 0;
    double dissimilarity = 0.0;
};

/// Merge history of one chronological clustering call, in merge order.
struct ClusterTree {
    std::vector<Merge> merges;
};

/// D_t - delta * sum_g x_g F_{g,t}.
FeatureSeries compute_net_demand(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts,
                                 const std::vector<double>& x_tilde);

/// The n_top largest values of a single-column series; ties go to the earlier step.
ProtectedSet build_protected_set(const FeatureSeries& net_demand, std::size_t n_top);

/// Steps of 0..horizon-1 that are not protected.
std::vector<std::size_t> clustering_domain(std::size_t horizon, const ProtectedSet& protected_steps);

/// Number of maximal runs of consecutive steps in an ascending domain.
std::size_t count_runs(const std::vector<std::size_t>& domain);

/// Centroid-linkage agglomeration of adjacent clusters inside each maximal run
/// of `domain` until r_target groups remain. Ties merge the earliest pair.
/// Throws InfeasibleTargetError when r_target is below the number of runs or
/// above the domain size. An empty domain yields no groups.
std::vector<std::vector<std::size_t>> chronological_cluster(const FeatureSeries& features,
                                                            const std::vector<std::size_t>& domain,
                                                            std::size_t r_target, ClusterTree* history = nullptr);

/// Clustered groups plus protected singletons in chronological order.
gep::Aggregation assemble_aggregation(const std::vector<std::vector<std::size_t>>& groups,
                                      const ProtectedSet& protected_steps, std::size_t horizon);

struct KMedoidsResult {
    std::vector<std::size_t> medoids;               ///< ascending step index
    std::vector<std::vector<std::size_t>> groups;   ///< groups[i] belongs to medoids[i]
    double cost = 0.0;                              ///< sum of L1 distances to the medoid
};

/// PAM with a greedy BUILD (ties ordered by a seeded shuffle) and FastPAM1
/// swaps on the L1 distance, over the given steps (all steps when empty).
KMedoidsResult kmedoids_cluster(const FeatureSeries& features, std::size_t r_target, std::uint64_t seed,
                                const std::vector<std::size_t>& domain = {});

/// Medoid aggregation of k-medoids groups plus protected singletons, ordered by
/// representative step.
gep::Aggregation assemble_medoid_aggregation(const KMedoidsResult& clusters, const ProtectedSet& protected_steps,
                                             std::size_t horizon);

/// CSV with header original_step,representative_id,weight (1-based ids), plus
/// a medoid_step column for medoid aggregations.
void write_aggregation_csv(std::ostream& out, const gep::Aggregation& agg);
gep::Aggregation read_aggregation_csv(std::istream& in);

}  // namespace mcbtsa::tsa
