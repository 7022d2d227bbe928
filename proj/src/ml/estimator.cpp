#include "mcbtsa/ml/estimator.hpp"

#include <cmath>

#include "mcbtsa/error.hpp"
#include "mcbtsa/gep/model.hpp"

namespace mcbtsa::ml {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

TrainingSet build_training_labels(const gep::SystemSpec& spec, const FeatureMatrix& sampled,
                                  double investment_scale, const lp::SolverOptions& options) {
    if (!(investment_scale > 0.0)) {
        throw ValidationError("investment scale must be positive");
    }
    gep::SystemSpec reduced = spec;
    for (auto& g : reduced.generators) {
        g.c_inv *= investment_scale;
    }
    reduced.budget *= investment_scale;

    auto ts = to_timeseries(spec, sampled);
    if (spec.market_participation) {
        const double cap = std::nextafter(spec.c_ns, 0.0);
        for (auto& p : ts.price) {
            p = std::min(p, cap);
        }
    }
    ts.validate(reduced);
    const auto model = gep::build_full_model(reduced, ts);
    const auto solved = gep::solve_model(model, options);

    TrainingSet out;
    out.features = sampled;
    out.duals = gep::extract_marginal_costs(model.problem, solved.lp).values;
    out.dictionary = LabelDictionary::fit(out.duals);
    out.labels.reserve(out.duals.size());
    for (double v : out.duals) {
        out.labels.push_back(*out.dictionary.class_of(v));
    }
    out.x_tilde = solved.solution.x;
    out.lp_iterations = static_cast<std::size_t>(solved.lp.iterations);
    return out;
}

gep::MarginalCostSeries predict_marginal_costs(const RandomForest& forest, const FeatureMatrix& features) {
    return {predict_values(forest, features)};
}

EstimatorOutput estimate(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts, const EstimatorConfig& config) {
    spec.validate();
    ts.validate(spec);
    if (config.k == 0) {
        throw ValidationError("K must be at least 1");
    }
    const auto full = build_feature_matrix(spec, ts);
    const auto kde = fit_kde(full);
    const auto sampled = sample_kde(kde, config.k, derive_seed(config.seed, 0));
    const double scale = static_cast<double>(config.k) / static_cast<double>(ts.horizon());
    const auto training = build_training_labels(spec, sampled, scale, config.solver);

    ForestConfig fc;
    fc.trees = config.trees;
    fc.max_depth = config.max_depth;
    fc.bootstrap = config.bootstrap;
    fc.seed = derive_seed(config.seed, 1);
    fc.threads = config.threads;
    EstimatorOutput out;
    out.forest = train_forest(training.features, training.labels, training.dictionary, fc);
    out.mu = predict_marginal_costs(out.forest, full);
    out.x_tilde = training.x_tilde;
    out.bandwidths = kde.bandwidths;
    out.lp_iterations = training.lp_iterations;
    return out;
}

}  // namespace mcbtsa::ml
