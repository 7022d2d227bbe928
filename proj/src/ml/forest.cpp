#include "mcbtsa/ml/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "mcbtsa/error.hpp"
#include "mcbtsa/ml/estimator.hpp"

namespace mcbtsa::ml {

double LabelDictionary::round_key(double v) {
    const double k = std::round(v * 1e4) / 1e4;
    return k == 0.0 ? 0.0 : k;
}

std::optional<int> LabelDictionary::class_of(double v) const {
    const double k = round_key(v);
    const auto it = std::lower_bound(keys.begin(), keys.end(), k);
    if (it == keys.end() || *it != k) {
        return std::nullopt;
    }
    return static_cast<int>(it - keys.begin());
}

LabelDictionary LabelDictionary::fit(const std::vector<double>& raw) {
    LabelDictionary d;
    for (double v : raw) {
        d.keys.push_back(round_key(v));
    }
    std::sort(d.keys.begin(), d.keys.end());
    d.keys.erase(std::unique(d.keys.begin(), d.keys.end()), d.keys.end());
    std::vector<double> sum(d.keys.size(), 0.0);
    std::vector<double> count(d.keys.size(), 0.0);
    for (double v : raw) {
        const auto c = static_cast<std::size_t>(*d.class_of(v));
        sum[c] += v;
        count[c] += 1.0;
    }
    d.values.resize(d.keys.size());
    for (std::size_t c = 0; c < d.keys.size(); ++c) {
        d.values[c] = sum[c] / count[c];
    }
    return d;
}

int DecisionTree::predict(const double* row) const {
    int n = 0;
    while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
        const auto& node = nodes[static_cast<std::size_t>(n)];
        n = row[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(n)].label;
}

int DecisionTree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (nodes[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

int RandomForest::predict_class(const double* row) const {
    std::vector<int> votes(labels.size(), 0);
    for (const auto& t : trees) {
        ++votes[static_cast<std::size_t>(t.predict(row))];
    }
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

namespace {

int majority(const std::vector<int>& labels, const std::vector<std::size_t>& idx, std::size_t classes) {
    std::vector<std::size_t> count(classes, 0);
    for (auto i : idx) {
        ++count[static_cast<std::size_t>(labels[i])];
    }
    return static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
};

// Minimises n_L gini_L + n_R gini_R = n - sq_L / n_L - sq_R / n_R.
Split best_split(const FeatureMatrix& x, const std::vector<int>& labels, const std::vector<std::size_t>& idx,
                 std::size_t classes) {
    Split best;
    const std::size_t n = idx.size();
    std::vector<std::size_t> order(idx);
    std::vector<double> left(classes);
    std::vector<double> right(classes);
    for (std::size_t f = 0; f < x.cols(); ++f) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return x.at(a, f) < x.at(b, f); });
        if (x.at(order.front(), f) == x.at(order.back(), f)) {
            continue;
        }
        std::fill(left.begin(), left.end(), 0.0);
        std::fill(right.begin(), right.end(), 0.0);
        double sq_right = 0.0;
        for (auto i : order) {
            right[static_cast<std::size_t>(labels[i])] += 1.0;
        }
        for (double c : right) {
            sq_right += c * c;
        }
        double sq_left = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const auto c = static_cast<std::size_t>(labels[order[k]]);
            sq_left += 2.0 * left[c] + 1.0;
            left[c] += 1.0;
            sq_right -= 2.0 * right[c] - 1.0;
            right[c] -= 1.0;
            const double a = x.at(order[k], f);
            const double b = x.at(order[k + 1], f);
            if (a == b) {
                continue;
            }
            const double nl = static_cast<double>(k + 1);
            const double nr = static_cast<double>(n - k - 1);
            const double score = static_cast<double>(n) - sq_left / nl - sq_right / nr;
            if (score < best.score) {
                double mid = a + (b - a) / 2.0;
                if (!(mid < b)) {
                    mid = a;
                }
                best = {static_cast<int>(f), mid, score};
            }
        }
    }
    return best;
}

DecisionTree grow_tree(const FeatureMatrix& x, const std::vector<int>& labels, std::vector<std::size_t> sample,
                       std::size_t classes, int max_depth) {
    DecisionTree tree;
    struct Pending {
        std::size_t node;
        std::vector<std::size_t> idx;
        int depth;
    };
    std::vector<Pending> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, std::move(sample), 0});
    while (!stack.empty()) {
        Pending job = std::move(stack.back());
        stack.pop_back();
        tree.nodes[job.node].label = majority(labels, job.idx, classes);
        bool pure = true;
        for (auto i : job.idx) {
            pure = pure && labels[i] == labels[job.idx.front()];
        }
        if (pure || job.depth >= max_depth || job.idx.size() < 2) {
            continue;
        }
        const Split s = best_split(x, labels, job.idx, classes);
        if (s.feature < 0) {
            continue;
        }
        std::vector<std::size_t> l;
        std::vector<std::size_t> r;
        for (auto i : job.idx) {
            (x.at(i, static_cast<std::size_t>(s.feature)) <= s.threshold ? l : r).push_back(i);
        }
        const auto li = tree.nodes.size();
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& node = tree.nodes[job.node];
        node.feature = s.feature;
        node.threshold = s.threshold;
        node.left = static_cast<int>(li);
        node.right = static_cast<int>(li + 1);
        stack.push_back({li + 1, std::move(r), job.depth + 1});
        stack.push_back({li, std::move(l), job.depth + 1});
    }
    return tree;
}

}  // namespace

RandomForest train_forest(const FeatureMatrix& features, const std::vector<int>& labels,
                          const LabelDictionary& dictionary, const ForestConfig& config) {
    if (features.rows == 0) {
        throw ValidationError("empty training set");
    }
    if (labels.size() != features.rows) {
        throw ValidationError("one label per training row is required");
    }
    if (config.trees < 1 || config.max_depth < 0) {
        throw ValidationError("forest needs at least one tree and a non-negative depth");
    }
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= dictionary.size()) {
            throw ValidationError("label outside the dictionary");
        }
    }
    RandomForest forest;
    forest.columns = features.names;
    forest.labels = dictionary;
    forest.trees.resize(static_cast<std::size_t>(config.trees));
    const std::size_t n = features.rows;

    auto train_one = [&](std::size_t m) {
        std::vector<std::size_t> sample(n);
        if (config.bootstrap) {
            std::mt19937_64 rng(derive_seed(config.seed, m));
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (auto& s : sample) {
                s = pick(rng);
            }
        } else {
            std::iota(sample.begin(), sample.end(), 0);
        }
        forest.trees[m] = grow_tree(features, labels, std::move(sample), dictionary.size(), config.max_depth);
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.trees)));
    if (workers == 1) {
        for (std::size_t m = 0; m < forest.trees.size(); ++m) {
            train_one(m);
        }
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t m = w; m < forest.trees.size(); m += workers) {
                    train_one(m);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return forest;
}

std::vector<double> predict_values(const RandomForest& forest, const FeatureMatrix& features) {
    if (features.names != forest.columns) {
        throw ValidationError("feature columns do not match the trained forest");
    }
    std::vector<double> out(features.rows);
    for (std::size_t r = 0; r < features.rows; ++r) {
        out[r] = forest.labels.values[static_cast<std::size_t>(forest.predict_class(&features.data[r * features.cols()]))];
    }
    return out;
}

namespace {

constexpr const char* kSchema = "mcbtsa.forest";
constexpr int kVersion = 1;

nlohmann::json node_to_json(const DecisionTree& tree, int n) {
    const auto& node = tree.nodes[static_cast<std::size_t>(n)];
    if (node.feature < 0) {
        return {{"label", node.label}};
    }
    return {{"feature", node.feature},
            {"threshold", node.threshold},
            {"label", node.label},
            {"left", node_to_json(tree, node.left)},
            {"right", node_to_json(tree, node.right)}};
}

int node_from_json(const nlohmann::json& j, DecisionTree& tree, std::size_t classes, std::size_t cols) {
    const auto n = tree.nodes.size();
    tree.nodes.emplace_back();
    TreeNode node;
    node.label = j.at("label").get<int>();
    if (node.label < 0 || static_cast<std::size_t>(node.label) >= classes) {
        throw ValidationError("model file: label outside the dictionary");
    }
    if (j.contains("feature")) {
        node.feature = j.at("feature").get<int>();
        if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= cols) {
            throw ValidationError("model file: split feature out of range");
        }
        node.threshold = j.at("threshold").get<double>();
        node.left = node_from_json(j.at("left"), tree, classes, cols);
        node.right = node_from_json(j.at("right"), tree, classes, cols);
    }
    tree.nodes[n] = node;
    return static_cast<int>(n);
}

}  // namespace

nlohmann::json forest_to_json(const RandomForest& forest, const std::vector<double>& bandwidths) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : forest.trees) {
        trees.push_back(node_to_json(t, 0));
    }
    return {{"schema", kSchema},
            {"version", kVersion},
            {"columns", forest.columns},
            {"labels", {{"keys", forest.labels.keys}, {"values", forest.labels.values}}},
            {"bandwidths", bandwidths},
            {"trees", trees}};
}

ModelDocument forest_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("schema").get<std::string>() != kSchema) {
            throw ValidationError("model file: unexpected schema");
        }
        if (doc.at("version").get<int>() != kVersion) {
            throw ValidationError("model file: unsupported version " + doc.at("version").dump());
        }
        ModelDocument out;
        out.forest.columns = doc.at("columns").get<std::vector<std::string>>();
        out.forest.labels.keys = doc.at("labels").at("keys").get<std::vector<double>>();
        out.forest.labels.values = doc.at("labels").at("values").get<std::vector<double>>();
        if (out.forest.labels.keys.size() != out.forest.labels.values.size() || out.forest.labels.size() == 0) {
            throw ValidationError("model file: malformed label dictionary");
        }
        out.bandwidths = doc.at("bandwidths").get<std::vector<double>>();
        for (const auto& t : doc.at("trees")) {
            DecisionTree tree;
            node_from_json(t, tree, out.forest.labels.size(), out.forest.columns.size());
            out.forest.trees.push_back(std::move(tree));
        }
        if (out.forest.trees.empty()) {
            throw ValidationError("model file: no trees");
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("model file: ") + e.what());
    }
}

}  // namespace mcbtsa::ml
