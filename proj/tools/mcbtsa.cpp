#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcbtsa/algorithm/run.hpp"
#include "mcbtsa/bench/experiment.hpp"
#include "mcbtsa/bench/io.hpp"
#include "mcbtsa/error.hpp"
#include "mcbtsa/gep/model.hpp"
#include "mcbtsa/ml/estimator.hpp"
#include "mcbtsa/tsa/clustering.hpp"

namespace fs = std::filesystem;
using namespace mcbtsa;
using algorithm::format_fixed;

namespace {

enum Exit { kOk = 0, kInternal = 1, kValidation = 2, kSolver = 3, kPartial = 4 };

// Everything a subcommand may take from the config file and override by flag.
struct Options {
    std::string config;
    std::string system;
    std::optional<std::string> vre;
    std::optional<double> ratio;
    std::string data;
    std::optional<std::size_t> horizon;
    std::optional<std::uint64_t> data_seed;
    bool no_scale = false;

    std::optional<std::string> method;
    std::optional<std::size_t> r0, delta_r, r_max, k, n_top;
    std::optional<double> eps_target;
    std::optional<int> trees, max_depth;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    bool count_protected = false;
    std::optional<std::size_t> max_lp_iterations;
};

void add_instance_options(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--system", o.system, "system description (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--vre", o.vre, "built-in system: renewable technology")->check(CLI::IsMember({"pv", "wind"}));
    sub->add_option("--ratio", o.ratio, "built-in system: storage energy-to-power ratio in hours");
    sub->add_option("--data", o.data, "time series CSV")->check(CLI::ExistingFile);
    sub->add_option("--horizon", o.horizon, "synthetic horizon in steps");
    sub->add_option("--data-seed", o.data_seed, "synthetic generator seed");
    sub->add_flag("--no-scale", o.no_scale, "keep investment costs and budget unscaled");
}

void add_algorithm_options(CLI::App* sub, Options& o) {
    sub->add_option("--method", o.method, "MCB, input-CHC, kmedoids-net-demand or kmedoids-input");
    sub->add_option("--R0", o.r0);
    sub->add_option("--delta-R", o.delta_r);
    sub->add_option("--R-max", o.r_max);
    sub->add_option("--eps-target", o.eps_target, "percent");
    sub->add_option("--K", o.k, "KDE samples");
    sub->add_option("--N-top", o.n_top, "protected net-demand steps");
    sub->add_option("--trees", o.trees);
    sub->add_option("--max-depth", o.max_depth);
    sub->add_option("--threads", o.threads, "forest training threads");
    sub->add_flag("--count-protected-in-R", o.count_protected);
    sub->add_option("--max-lp-iterations", o.max_lp_iterations);
}

bench::ExperimentConfig resolve(const Options& o) {
    bench::ExperimentConfig c;
    if (!o.config.empty()) {
        c = bench::experiment_from_json(bench::read_json(o.config), fs::path(o.config).parent_path());
    }
    if (!o.system.empty()) {
        c.system = bench::load_system(o.system);
    } else if (o.vre || o.ratio) {
        c.system = bench::default_system(o.vre.value_or("pv"), o.ratio.value_or(4.0));
    }
    if (!o.data.empty()) {
        c.timeseries_file = o.data;
    }
    if (o.horizon) {
        c.synthetic.horizon = *o.horizon;
        c.timeseries_file.reset();
    }
    if (o.data_seed) {
        c.synthetic.seed = *o.data_seed;
    }
    if (o.no_scale) {
        c.scale_investment_to_horizon = false;
    }
    auto& a = c.algorithm;
    if (o.method) {
        a.method = algorithm::parse_method(*o.method);
    }
    if (o.r0) a.r0 = *o.r0;
    if (o.delta_r) a.delta_r = *o.delta_r;
    if (o.r_max) a.r_max = *o.r_max;
    if (o.eps_target) a.eps_target = *o.eps_target;
    if (o.k) a.k = *o.k;
    if (o.n_top) a.n_top = *o.n_top;
    if (o.trees) a.trees = *o.trees;
    if (o.max_depth) a.max_depth = *o.max_depth;
    if (o.threads) a.threads = *o.threads;
    if (o.seed) {
        a.seed = *o.seed;
        c.seed = *o.seed;
    }
    if (o.count_protected) a.count_protected_in_r = true;
    if (o.max_lp_iterations) a.solver.max_iterations = *o.max_lp_iterations;
    c.validate();
    return c;
}

std::string series_csv(const std::string& name, const std::vector<double>& values) {
    std::ostringstream ss;
    ss << "step," << name << '\n';
    for (std::size_t t = 0; t < values.size(); ++t) {
        ss << t + 1 << ',' << format_fixed(values[t]) << '\n';
    }
    return ss.str();
}

nlohmann::json capacities(const gep::SystemSpec& spec, const std::vector<double>& x) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t g = 0; g < spec.generators.size(); ++g) {
        j[spec.generators[g].name] = x[g];
    }
    return j;
}

int cmd_gen_data(const Options& o, const std::string& out, const std::string& system_out) {
    auto c = resolve(o);
    if (c.timeseries_file) {
        throw ValidationError("gen-data generates synthetic inputs; drop --data");
    }
    const auto ts = bench::generate_synthetic(c.system, c.synthetic.profile, c.synthetic.horizon, c.synthetic.seed);
    bench::write_timeseries(out, c.system, ts);
    if (!system_out.empty()) {
        bench::write_text(system_out, bench::dump_json(bench::system_to_json(c.system)) + "\n");
    }
    std::cout << "wrote " << ts.horizon() << " steps to " << out << '\n';
    return kOk;
}

int cmd_solve_full(const Options& o, const std::string& out, const std::string& duals) {
    const auto c = resolve(o);
    const auto inst = bench::load_instance(c);
    const auto start = std::chrono::steady_clock::now();
    const auto model = gep::build_full_model(inst.spec, inst.ts);
    const auto solved = gep::solve_model(model, c.algorithm.solver);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "objective " << format_fixed(solved.solution.objective) << '\n';
    for (std::size_t g = 0; g < inst.spec.generators.size(); ++g) {
        std::cout << "x[" << inst.spec.generators[g].name << "] " << format_fixed(solved.solution.x[g]) << '\n';
    }
    std::cout << "lp_iterations " << solved.lp.iterations << "\nseconds " << format_fixed(seconds) << '\n';
    if (!out.empty()) {
        const nlohmann::json doc = {{"objective", solved.solution.objective},
                                    {"capacities", capacities(inst.spec, solved.solution.x)},
                                    {"unserved_energy", solved.solution.e_ns},
                                    {"lp_iterations", solved.lp.iterations},
                                    {"horizon", inst.ts.horizon()}};
        bench::write_text(out, bench::dump_json(doc) + "\n");
    }
    if (!duals.empty()) {
        bench::write_text(duals, series_csv("mu", gep::extract_marginal_costs(model.problem, solved.lp).values));
    }
    return kOk;
}

int cmd_estimate(const Options& o, const std::string& out, const std::string& mu_out) {
    const auto c = resolve(o);
    const auto inst = bench::load_instance(c);
    ml::EstimatorConfig ec;
    ec.k = c.algorithm.k;
    ec.trees = c.algorithm.trees;
    ec.max_depth = c.algorithm.max_depth;
    ec.seed = c.algorithm.seed;
    ec.threads = c.algorithm.threads;
    ec.solver = c.algorithm.solver;
    const auto est = ml::estimate(inst.spec, inst.ts, ec);
    auto doc = ml::forest_to_json(est.forest, est.bandwidths);
    doc["x_tilde"] = capacities(inst.spec, est.x_tilde);
    doc["mu"] = est.mu.values;
    bench::write_text(out, bench::dump_json(doc) + "\n");
    if (!mu_out.empty()) {
        bench::write_text(mu_out, series_csv("mu_bar", est.mu.values));
    }
    std::cout << "classes " << est.forest.labels.keys.size() << "\nlp_iterations " << est.lp_iterations << '\n';
    for (std::size_t g = 0; g < inst.spec.generators.size(); ++g) {
        std::cout << "x_tilde[" << inst.spec.generators[g].name << "] " << format_fixed(est.x_tilde[g]) << '\n';
    }
    return kOk;
}

int cmd_aggregate(const Options& o, std::size_t r, const std::string& out) {
    const auto c = resolve(o);
    const auto inst = bench::load_instance(c);
    const auto features = algorithm::method_features(inst.spec, inst.ts, c.algorithm);
    tsa::ProtectedSet prot;
    const auto agg = algorithm::aggregate_at(inst.spec, inst.ts, c.algorithm, features, r, 1, &prot);
    std::ostringstream ss;
    tsa::write_aggregation_csv(ss, agg);
    bench::write_text(out, ss.str());
    std::cout << "representatives " << agg.size() << "\nprotected " << prot.steps.size() << '\n';
    return kOk;
}

int cmd_run(const Options& o, const std::string& out) {
    const auto c = resolve(o);
    const auto inst = bench::load_instance(c);
    const auto result = algorithm::run(inst.spec, inst.ts, c.algorithm);
    const auto name = algorithm::to_string(result.method);
    const fs::path dir(out);
    std::ostringstream it;
    algorithm::write_iterations_csv(it, result);
    bench::write_text(dir / ("iterations_" + name + "_1.csv"), it.str());
    bench::emit_convergence_plotdata(result, dir / ("convergence_" + name + ".csv"));
    bench::write_text(dir / "run.json", bench::dump_json(algorithm::to_json(result)) + "\n");
    std::cout << it.str();
    const auto& last = result.iterations.back();
    std::cout << "termination " << algorithm::to_string(result.termination) << " eps " << format_fixed(last.eps)
              << " R " << last.r << '\n';
    return kOk;
}

int cmd_bench(const Options& o, const std::string& out, std::optional<unsigned> workers,
              std::optional<std::size_t> scenarios, const std::vector<std::string>& methods) {
    auto c = resolve(o);
    if (!out.empty()) {
        c.output_dir = out;
    }
    if (workers) {
        c.workers = *workers;
    }
    if (scenarios) {
        c.scenarios = *scenarios;
    }
    if (!methods.empty()) {
        c.methods.clear();
        for (const auto& m : methods) {
            c.methods.push_back(algorithm::parse_method(m));
        }
    }
    c.validate();
    const auto report = bench::run_benchmark(c);
    std::size_t failed = 0;
    for (const auto& m : report.outcomes) {
        if (!m.ok) {
            ++failed;
            std::cerr << algorithm::to_string(m.method) << " scenario " << m.scenario << ": " << m.error << '\n';
        }
    }
    std::cout << "wrote " << c.output_dir.string() << "; " << report.outcomes.size() - failed << " of "
              << report.outcomes.size() << " runs completed\n";
    return failed == 0 ? kOk : kPartial;
}

int exit_for(std::exception_ptr p) {
    try {
        std::rethrow_exception(p);
    } catch (const algorithm::RunAborted& e) {
        std::cerr << "error: " << e.what() << '\n';
        try {
            std::rethrow_exception(e.cause());
        } catch (const SolverError&) {
            return kSolver;
        } catch (const ValidationError&) {
            return kValidation;
        } catch (const IoError&) {
            return kValidation;
        } catch (...) {
            return kInternal;
        }
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kSolver;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kValidation;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInternal;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Marginal-cost-based time series aggregation for generation expansion planning"};
    app.require_subcommand(1);
    Options o;

    auto* gen = app.add_subcommand("gen-data", "write a synthetic time series");
    add_instance_options(gen, o);
    std::string gen_out, gen_system_out;
    gen->add_option("--out", gen_out, "output CSV")->required();
    gen->add_option("--system-out", gen_system_out, "also write the system description");

    auto* full = app.add_subcommand("solve-full", "solve the full-resolution model");
    add_instance_options(full, o);
    std::string full_out, full_duals;
    full->add_option("--out", full_out, "result JSON");
    full->add_option("--duals", full_duals, "marginal costs CSV");
    full->add_option("--max-lp-iterations", o.max_lp_iterations);

    auto* est = app.add_subcommand("estimate", "estimate marginal costs with the KDE + forest pipeline");
    add_instance_options(est, o);
    add_algorithm_options(est, o);
    est->add_option("--seed", o.seed);
    std::string est_out, est_mu;
    est->add_option("--out", est_out, "model JSON")->required();
    est->add_option("--mu-out", est_mu, "estimated marginal costs CSV");

    auto* agg = app.add_subcommand("aggregate", "build one aggregation at a given R");
    add_instance_options(agg, o);
    add_algorithm_options(agg, o);
    agg->add_option("--seed", o.seed);
    std::size_t agg_r = 0;
    std::string agg_out;
    agg->add_option("--R", agg_r, "representatives to cluster into")->required();
    agg->add_option("--out", agg_out, "aggregation CSV")->required();

    auto* run = app.add_subcommand("run", "run the iterative aggregation loop");
    add_instance_options(run, o);
    add_algorithm_options(run, o);
    run->add_option("--seed", o.seed);
    std::string run_out = "run_out";
    run->add_option("--out", run_out, "output directory");

    auto* bench_cmd = app.add_subcommand("bench", "perturbation benchmark over scenarios and methods");
    add_instance_options(bench_cmd, o);
    add_algorithm_options(bench_cmd, o);
    bench_cmd->add_option("--seed", o.seed, "master seed")->required();
    std::string bench_out;
    std::optional<unsigned> workers;
    std::optional<std::size_t> scenarios;
    std::vector<std::string> methods;
    bench_cmd->add_option("--out", bench_out, "output directory");
    bench_cmd->add_option("--workers", workers);
    bench_cmd->add_option("--scenarios", scenarios);
    bench_cmd->add_option("--methods", methods);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    }

    try {
        if (*gen) return cmd_gen_data(o, gen_out, gen_system_out);
        if (*full) return cmd_solve_full(o, full_out, full_duals);
        if (*est) return cmd_estimate(o, est_out, est_mu);
        if (*agg) return cmd_aggregate(o, agg_r, agg_out);
        if (*run) return cmd_run(o, run_out);
        if (*bench_cmd) return cmd_bench(o, bench_out, workers, scenarios, methods);
    } catch (...) {
        return exit_for(std::current_exception());
    }
    return kInternal;
}
