#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mcbtsa/ml/kde.hpp"

namespace mcbtsa::ml {

/// Marginal-cost classes: values rounded to 4 decimals, ids in ascending order.
struct LabelDictionary {
    std::vector<double> keys;    ///< rounded value per class
    std::vector<double> values;  ///< mean of the raw members per class

    std::size_t size() const { return keys.size(); }
    static double round_key(double v);
    /// Class of a value after rounding; nullopt when unknown.
    std::optional<int> class_of(double v) const;
    static LabelDictionary fit(const std::vector<double>& raw);
};

struct TreeNode {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;     ///< x[feature] <= threshold
    int right = -1;
    int label = 0;     ///< majority class of the node's samples
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root

    int predict(const double* row) const;
    int depth() const;
};

struct ForestConfig {
    int trees = 100;
    int max_depth = 20;
    bool bootstrap = true;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct RandomForest {
    std::vector<std::string> columns;
    LabelDictionary labels;
    std::vector<DecisionTree> trees;

    /// Majority vote, ties to the lowest class id.
    int predict_class(const double* row) const;
};

/// CART on Gini impurity over all features, midpoint thresholds. Tree m
/// bootstraps with a seed derived from (seed, m).
RandomForest train_forest(const FeatureMatrix& features, const std::vector<int>& labels,
                          const LabelDictionary& dictionary, const ForestConfig& config);

/// Representative value of the voted class per row.
std::vector<double> predict_values(const RandomForest& forest, const FeatureMatrix& features);

/// Versioned JSON document with the forest and the KDE bandwidths.
nlohmann::json forest_to_json(const RandomForest& forest, const std::vector<double>& bandwidths);

struct ModelDocument {
    RandomForest forest;
    std::vector<double> bandwidths;
};

ModelDocument forest_from_json(const nlohmann::json& doc);

}  // namespace mcbtsa::ml
