#pragma once

#include <cstdint>
#include <vector>

#include "mcbtsa/gep/types.hpp"
#include "mcbtsa/lp/solver.hpp"
#include "mcbtsa/ml/forest.hpp"
#include "mcbtsa/ml/kde.hpp"

namespace mcbtsa::ml {

struct TrainingSet {
    FeatureMatrix features;
    std::vector<int> labels;
    LabelDictionary dictionary;
    std::vector<double> duals;    ///< raw balance duals of the reduced solve
    std::vector<double> x_tilde;  ///< capacities of the reduced solve, MW
    std::size_t lp_iterations = 0;
};

/// Solves the full-scale model over the sampled steps in sample order and
/// labels each step by its rounded balance dual. Investment costs and the
/// budget are multiplied by investment_scale, typically K/T.
TrainingSet build_training_labels(const gep::SystemSpec& spec, const FeatureMatrix& sampled,
                                  double investment_scale = 1.0, const lp::SolverOptions& options = {});

/// Predicted marginal cost per row; throws ValidationError on a column mismatch.
gep::MarginalCostSeries predict_marginal_costs(const RandomForest& forest, const FeatureMatrix& features);

struct EstimatorConfig {
    std::size_t k = 500;
    int trees = 100;
    int max_depth = 20;
    bool bootstrap = true;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    lp::SolverOptions solver;
};

struct EstimatorOutput {
    gep::MarginalCostSeries mu;
    std::vector<double> x_tilde;
    RandomForest forest;
    std::vector<double> bandwidths;
    std::size_t lp_iterations = 0;
};

/// fit_kde -> sample_kde -> build_training_labels -> train_forest -> predict.
EstimatorOutput estimate(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts, const EstimatorConfig& config);

/// splitmix64 mix of a master seed and a stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mcbtsa::ml
