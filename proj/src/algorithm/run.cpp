#include "mcbtsa/algorithm/run.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <ostream>

#include "mcbtsa/gep/model.hpp"
#include "mcbtsa/ml/estimator.hpp"

namespace mcbtsa::algorithm {

std::string to_string(Method m) {
    switch (m) {
        case Method::Mcb:
            return "MCB";
        case Method::InputChc:
            return "input-CHC";
        case Method::KMedoidsNetDemand:
            return "kmedoids-net-demand";
        case Method::KMedoidsInput:
            return "kmedoids-input";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    for (auto m : {Method::Mcb, Method::InputChc, Method::KMedoidsNetDemand, Method::KMedoidsInput}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw ValidationError("unknown method '" + name + "'");
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::GapMet:
            return "gap-met";
        case Termination::RExhausted:
            return "R-exhausted";
        case Termination::Aborted:
            return "aborted";
    }
    return "?";
}

void AlgorithmConfig::validate() const {
    if (r0 < 1 || delta_r < 1 || r_max < r0 || !(eps_target > 0.0) || k < 1) {
        throw ValidationError("algorithm config requires R0 >= 1, delta_R >= 1, R_max >= R0, eps_target > 0, K >= 1");
    }
    if (trees < 1 || max_depth < 0) {
        throw ValidationError("forest needs at least one tree and a non-negative depth");
    }
}

RunAborted::RunAborted(RunResult partial, std::exception_ptr cause, const std::string& what)
    : Error(what), partial_(std::move(partial)), cause_(std::move(cause)) {}

double gap(double f_lb, double f_ub) {
    if (f_ub == 0.0) {
        throw UndefinedGapError("optimality gap is undefined for a zero upper bound");
    }
    return 100.0 * (f_ub - f_lb) / f_ub;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

gep::Aggregation cluster_step(const AlgorithmConfig& config, const MethodFeatures& features,
                              const tsa::ProtectedSet& prot, const std::vector<std::size_t>& domain, std::size_t runs,
                              std::size_t r, std::size_t iteration, std::size_t& r_cl) {
    r_cl = r;
    if (config.count_protected_in_r) {
        r_cl = r > config.n_top ? r - config.n_top : 0;
    }
    r_cl = std::clamp(r_cl, runs, domain.size());
    const std::size_t horizon = features.features.horizon();
    if (config.method == Method::KMedoidsNetDemand || config.method == Method::KMedoidsInput) {
        tsa::KMedoidsResult km;
        if (!domain.empty()) {
            km = tsa::kmedoids_cluster(features.features, r_cl, ml::derive_seed(config.seed, 1000 + iteration), domain);
        }
        return tsa::assemble_medoid_aggregation(km, prot, horizon);
    }
    return tsa::assemble_aggregation(tsa::chronological_cluster(features.features, domain, r_cl), prot, horizon);
}

}  // namespace

Bounds compute_bounds(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts, const gep::Aggregation& agg,
                      const lp::SolverOptions& options) {
    Bounds b;
    auto start = std::chrono::steady_clock::now();
    const auto hat = gep::aggregate_inputs(ts, agg);
    const auto lower = gep::solve_model(gep::build_aggregated_model(spec, hat, agg), options);
    b.t_agg = seconds_since(start);
    b.f_lb = lower.solution.objective;
    b.x_hat = lower.solution.x;
    b.lp_iterations_agg = static_cast<std::size_t>(lower.lp.iterations);

    start = std::chrono::steady_clock::now();
    const auto upper = gep::solve_model(gep::build_dispatch_model(spec, ts, b.x_hat), options);
    b.t_ub = seconds_since(start);
    b.f_ub = upper.solution.objective;
    b.lp_iterations_ub = static_cast<std::size_t>(upper.lp.iterations);
    return b;
}

MethodFeatures method_features(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts,
                               const AlgorithmConfig& config) {
    MethodFeatures out;
    const bool needs_estimate = config.method == Method::Mcb || config.method == Method::KMedoidsNetDemand;
    if (needs_estimate) {
        ml::EstimatorConfig ec;
        ec.k = config.k;
        ec.trees = config.trees;
        ec.max_depth = config.max_depth;
        ec.seed = config.seed;
        ec.threads = config.threads;
        ec.solver = config.solver;
        auto est = ml::estimate(spec, ts, ec);
        out.x_tilde = est.x_tilde;
        if (config.method == Method::Mcb) {
            out.features = tsa::FeatureSeries::single(est.mu.values);
            out.mu_bar = std::move(est.mu);
        } else {
            out.features = tsa::compute_net_demand(spec, ts, out.x_tilde);
        }
        return out;
    }
    out.x_tilde.assign(spec.generators.size(), 0.0);
    const auto m = ml::build_feature_matrix(spec, ts);
    tsa::FeatureSeries raw;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        raw.columns.push_back(m.column(c));
    }
    out.features = tsa::standardize(raw);
    return out;
}

RunResult run(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts, const AlgorithmConfig& config) {
    spec.validate();
    ts.validate(spec);
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    MethodFeatures features;
    try {
        features = method_features(spec, ts, config);
    } catch (const std::exception& e) {
        RunResult partial;
        partial.method = config.method;
        throw RunAborted(std::move(partial), std::current_exception(), std::string("feature stage: ") + e.what());
    }
    const double t_features = seconds_since(start);
    try {
        auto result = run_with_features(spec, ts, config, features);
        result.t_features = t_features;
        return result;
    } catch (RunAborted& e) {
        auto partial = e.partial();
        partial.t_features = t_features;
        throw RunAborted(std::move(partial), e.cause(), e.what());
    }
}

gep::Aggregation aggregate_at(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts,
                              const AlgorithmConfig& config, const MethodFeatures& features, std::size_t r,
                              std::size_t iteration, tsa::ProtectedSet* protected_steps) {
    config.validate();
    if (features.features.horizon() != ts.horizon()) {
        throw ValidationError("features do not cover the horizon");
    }
    if (config.n_top > ts.horizon()) {
        throw ValidationError("N_top exceeds the horizon");
    }
    const auto prot = tsa::build_protected_set(tsa::compute_net_demand(spec, ts, features.x_tilde), config.n_top);
    const auto domain = tsa::clustering_domain(ts.horizon(), prot);
    std::size_t r_cl = 0;
    auto agg = cluster_step(config, features, prot, domain, tsa::count_runs(domain), r, iteration, r_cl);
    if (protected_steps) {
        *protected_steps = prot;
    }
    return agg;
}

RunResult run_with_features(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts,
                            const AlgorithmConfig& config, const MethodFeatures& features) {
    config.validate();
    const std::size_t horizon = ts.horizon();
    if (features.features.horizon() != horizon) {
        throw ValidationError("features do not cover the horizon");
    }
    if (config.n_top > horizon) {
        throw ValidationError("N_top exceeds the horizon");
    }
    RunResult result;
    result.method = config.method;
    result.mu_bar = features.mu_bar;
    result.x_tilde = features.x_tilde;

    try {
        result.protected_steps =
            tsa::build_protected_set(tsa::compute_net_demand(spec, ts, features.x_tilde), config.n_top);
        const auto domain = tsa::clustering_domain(horizon, result.protected_steps);
        const std::size_t runs = tsa::count_runs(domain);

        std::size_t r = config.r0;
        for (std::size_t it = 1;; ++it) {
            std::size_t r_cl = 0;
            auto agg = cluster_step(config, features, result.protected_steps, domain, runs, r, it, r_cl);

            const auto b = compute_bounds(spec, ts, agg, config.solver);
            IterationRecord rec;
            rec.iteration = it;
            rec.r = r;
            rec.r_clustered = r_cl;
            rec.r_total = agg.size();
            rec.f_lb = b.f_lb;
            rec.f_ub = b.f_ub;
            rec.eps = gap(b.f_lb, b.f_ub);
            rec.nonpositive_ub = b.f_ub <= 0.0;
            rec.t_agg = b.t_agg;
            rec.t_ub = b.t_ub;
            rec.lp_iterations_agg = b.lp_iterations_agg;
            rec.lp_iterations_ub = b.lp_iterations_ub;
            rec.x_hat = b.x_hat;
            result.iterations.push_back(std::move(rec));
            result.final_aggregation = std::move(agg);

            if (result.iterations.back().eps <= config.eps_target) {
                result.termination = Termination::GapMet;
                break;
            }
            r += config.delta_r;
            // Full resolution reached: larger R cannot change the model.
            if (r >= config.r_max || r_cl == domain.size()) {
                result.termination = Termination::RExhausted;
                break;
            }
        }
    } catch (const std::exception& e) {
        result.termination = Termination::Aborted;
        const std::string what = "iteration " + std::to_string(result.iterations.size() + 1) + ": " + e.what();
        throw RunAborted(std::move(result), std::current_exception(), what);
    }
    return result;
}

std::string format_fixed(double v) {
    if (!std::isfinite(v)) {
        return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    }
    char buf[512];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

nlohmann::json to_json(const RunResult& result) {
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& r : result.iterations) {
        iters.push_back({{"iteration", r.iteration},
                         {"R", r.r},
                         {"R_clustered", r.r_clustered},
                         {"R_total", r.r_total},
                         {"f_LB", r.f_lb},
                         {"f_UB", r.f_ub},
                         {"eps_percent", r.eps},
                         {"nonpositive_upper_bound", r.nonpositive_ub},
                         {"t_agg_s", r.t_agg},
                         {"t_ub_s", r.t_ub},
                         {"lp_iterations_agg", r.lp_iterations_agg},
                         {"lp_iterations_ub", r.lp_iterations_ub},
                         {"x_hat", r.x_hat}});
    }
    std::vector<std::size_t> prot;
    for (auto t : result.protected_steps.steps) {
        prot.push_back(t + 1);
    }
    nlohmann::json doc = {{"method", to_string(result.method)},
                          {"termination", to_string(result.termination)},
                          {"iterations", iters},
                          {"x_tilde", result.x_tilde},
                          {"protected_steps", prot},
                          {"t_features_s", result.t_features}};
    if (result.mu_bar) {
        doc["mu_bar"] = result.mu_bar->values;
    }
    const auto& agg = result.final_aggregation;
    if (agg.size() > 0) {
        std::size_t horizon = 0;
        for (const auto& g : agg.groups) {
            horizon += g.size();
        }
        std::vector<std::size_t> assignment(horizon);
        for (std::size_t r = 0; r < agg.size(); ++r) {
            for (auto t : agg.groups[r]) {
                assignment[t] = r + 1;
            }
        }
        nlohmann::json a = {{"R", agg.size()}, {"assignment", assignment}};
        if (agg.representation == gep::Representation::Medoid) {
            std::vector<std::size_t> med;
            for (auto m : agg.medoids) {
                med.push_back(m + 1);
            }
            a["medoids"] = med;
        }
        doc["final_aggregation"] = a;
    }
    return doc;
}

void write_iterations_csv(std::ostream& out, const RunResult& result) {
    out << "iteration,R,f_LB,f_UB,eps_percent,t_agg_s,t_ub_s,R_total\n";
    for (const auto& r : result.iterations) {
        out << r.iteration << ',' << r.r << ',' << format_fixed(r.f_lb) << ',' << format_fixed(r.f_ub) << ','
            << format_fixed(r.eps) << ',' << format_fixed(r.t_agg) << ',' << format_fixed(r.t_ub) << ','
            << r.r_total << '\n';
    }
}

}  // namespace mcbtsa::algorithm
