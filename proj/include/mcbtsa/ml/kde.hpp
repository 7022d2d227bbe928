#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcbtsa/gep/types.hpp"

namespace mcbtsa::ml {

enum class ColumnKind { CapacityFactor, Demand, Price };

/// Row-major samples x columns.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::vector<std::string> names;
    std::vector<ColumnKind> kinds;
    std::vector<double> data;

    std::size_t cols() const { return names.size(); }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    std::vector<double> column(std::size_t c) const;
};

/// Columns F_<generator> for every generator (1 for non-VRE), D, and price
/// when the market is enabled.
FeatureMatrix build_feature_matrix(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts);

/// Inverse of build_feature_matrix: one step per row.
gep::TimeSeriesTable to_timeseries(const gep::SystemSpec& spec, const FeatureMatrix& features);

struct KdeModel {
    FeatureMatrix training;
    std::vector<double> bandwidths;

    /// Product Gaussian kernel density over the columns with positive bandwidth.
    double density(const std::vector<double>& point) const;
};

/// Scott's rule h_j = sigma_j n^(-1/(d+4)), population sigma; constant columns get 0.
KdeModel fit_kde(const FeatureMatrix& features);

/// Training rows drawn uniformly plus N(0, h_j^2) noise; capacity factors
/// clipped to [0, 1], demand and price to >= 0.
FeatureMatrix sample_kde(const KdeModel& model, std::size_t k, std::uint64_t seed);

}  // namespace mcbtsa::ml
