#include "mcbtsa/bench/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "mcbtsa/bench/io.hpp"
#include "mcbtsa/error.hpp"
#include "mcbtsa/gep/model.hpp"
#include "mcbtsa/ml/estimator.hpp"

namespace mcbtsa::bench {

using algorithm::format_fixed;

gep::TimeSeriesTable perturb(const gep::TimeSeriesTable& ts, const gep::SystemSpec& spec,
                             const std::vector<std::string>& columns, double lo, double hi, std::uint64_t seed) {
    if (!(lo > 0.0) || !(lo <= hi) || !std::isfinite(hi)) {
        throw ValidationError("noise interval must satisfy 0 < lo <= hi");
    }
    std::vector<char> gen(spec.generators.size(), 0);
    bool demand = false;
    bool price = false;
    for (const auto& c : columns) {
        bool known = false;
        for (std::size_t g = 0; g < spec.generators.size(); ++g) {
            if (c == "F_" + spec.generators[g].name) {
                gen[g] = 1;
                known = true;
            }
        }
        if (c == "D") {
            demand = known = true;
        } else if (c == "price") {
            price = known = true;
        }
        if (!known) {
            throw ValidationError("cannot perturb unknown column '" + c + "'");
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    auto factor = [&] { return lo == hi ? lo : u(rng); };
    gep::TimeSeriesTable out = ts;
    for (std::size_t g = 0; g < spec.generators.size(); ++g) {
        if (!gen[g]) {
            continue;
        }
        for (auto& v : out.capacity_factor[g]) {
            v = std::clamp(v * factor(), 0.0, 1.0);
        }
    }
    if (demand) {
        for (auto& v : out.demand) {
            v *= factor();
        }
    }
    if (price) {
        for (auto& v : out.price) {
            v *= factor();
        }
    }
    return out;
}

void ExperimentConfig::validate() const {
    system.validate();
    algorithm.validate();
    if (scenarios < 1) {
        throw ValidationError("at least one scenario is required");
    }
    if (!(noise_lo > 0.0) || !(noise_lo <= noise_hi)) {
        throw ValidationError("noise interval must satisfy 0 < lo <= hi");
    }
    if (methods.empty()) {
        throw ValidationError("no methods configured");
    }
    if (!timeseries_file && synthetic.horizon < 1) {
        throw ValidationError("synthetic horizon must be at least 1");
    }
}

namespace {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& target) {
    if (j.contains(key)) {
        target = j.at(key).get<T>();
    }
}

}  // namespace

ExperimentConfig experiment_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    ExperimentConfig c;
    try {
        if (doc.value("schema", std::string()) != kExperimentSchema) {
            throw ValidationError(std::string("experiment config: schema must be \"") + kExperimentSchema + "\"");
        }
        auto resolve = [&](const std::string& p) {
            const std::filesystem::path path(p);
            return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
        };
        if (doc.contains("system")) {
            c.system = system_from_json(doc.at("system"));
        } else if (doc.contains("system_file")) {
            c.system = load_system(resolve(doc.at("system_file").get<std::string>()));
        } else {
            c.system = default_system(doc.value("vre", std::string("pv")), doc.value("energy_to_power_hours", 4.0));
        }
        if (doc.contains("timeseries_file")) {
            c.timeseries_file = resolve(doc.at("timeseries_file").get<std::string>());
        }
        if (doc.contains("synthetic")) {
            const auto& s = doc.at("synthetic");
            read_opt(s, "horizon", c.synthetic.horizon);
            read_opt(s, "seed", c.synthetic.seed);
            if (s.contains("profile")) {
                const auto& p = s.at("profile");
                auto& pr = c.synthetic.profile;
                read_opt(p, "demand_mean", pr.demand_mean);
                read_opt(p, "demand_daily", pr.demand_daily);
                read_opt(p, "demand_weekend_drop", pr.demand_weekend_drop);
                read_opt(p, "demand_seasonal", pr.demand_seasonal);
                read_opt(p, "demand_noise", pr.demand_noise);
                read_opt(p, "solar_peak", pr.solar_peak);
                read_opt(p, "wind_persistence", pr.wind_persistence);
                read_opt(p, "price_base", pr.price_base);
                read_opt(p, "price_slope", pr.price_slope);
                read_opt(p, "price_noise", pr.price_noise);
                read_opt(p, "start_day", pr.start_day);
            }
        }
        read_opt(doc, "scale_investment_to_horizon", c.scale_investment_to_horizon);
        if (doc.contains("methods")) {
            c.methods.clear();
            for (const auto& m : doc.at("methods")) {
                c.methods.push_back(algorithm::parse_method(m.get<std::string>()));
            }
        }
        read_opt(doc, "scenarios", c.scenarios);
        if (doc.contains("noise")) {
            const auto n = doc.at("noise").get<std::vector<double>>();
            if (n.size() != 2) {
                throw ValidationError("experiment config: noise must be [lo, hi]");
            }
            c.noise_lo = n[0];
            c.noise_hi = n[1];
        }
        read_opt(doc, "perturbed_columns", c.perturbed_columns);
        read_opt(doc, "seed", c.seed);
        if (doc.contains("output_dir")) {
            c.output_dir = resolve(doc.at("output_dir").get<std::string>());
        }
        read_opt(doc, "workers", c.workers);
        if (doc.contains("algorithm")) {
            const auto& a = doc.at("algorithm");
            auto& ac = c.algorithm;
            read_opt(a, "R0", ac.r0);
            read_opt(a, "delta_R", ac.delta_r);
            read_opt(a, "R_max", ac.r_max);
            read_opt(a, "eps_target", ac.eps_target);
            read_opt(a, "K", ac.k);
            read_opt(a, "N_top", ac.n_top);
            read_opt(a, "count_protected_in_R", ac.count_protected_in_r);
            read_opt(a, "trees", ac.trees);
            read_opt(a, "max_depth", ac.max_depth);
            read_opt(a, "threads", ac.threads);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("experiment config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json experiment_to_json(const ExperimentConfig& c) {
    std::vector<std::string> methods;
    for (auto m : c.methods) {
        methods.push_back(algorithm::to_string(m));
    }
    const auto& p = c.synthetic.profile;
    nlohmann::json doc = {
        {"schema", kExperimentSchema},
        {"system", system_to_json(c.system)},
        {"scale_investment_to_horizon", c.scale_investment_to_horizon},
        {"methods", methods},
        {"scenarios", c.scenarios},
        {"noise", {c.noise_lo, c.noise_hi}},
        {"perturbed_columns", c.perturbed_columns},
        {"seed", c.seed},
        {"output_dir", c.output_dir.string()},
        {"workers", c.workers},
        {"algorithm",
         {{"R0", c.algorithm.r0},
          {"delta_R", c.algorithm.delta_r},
          {"R_max", c.algorithm.r_max},
          {"eps_target", c.algorithm.eps_target},
          {"K", c.algorithm.k},
          {"N_top", c.algorithm.n_top},
          {"count_protected_in_R", c.algorithm.count_protected_in_r},
          {"trees", c.algorithm.trees},
          {"max_depth", c.algorithm.max_depth},
          {"threads", c.algorithm.threads}}}};
    if (c.timeseries_file) {
        doc["timeseries_file"] = c.timeseries_file->string();
    } else {
        doc["synthetic"] = {{"horizon", c.synthetic.horizon},
                            {"seed", c.synthetic.seed},
                            {"profile",
                             {{"demand_mean", p.demand_mean},
                              {"demand_daily", p.demand_daily},
                              {"demand_weekend_drop", p.demand_weekend_drop},
                              {"demand_seasonal", p.demand_seasonal},
                              {"demand_noise", p.demand_noise},
                              {"solar_peak", p.solar_peak},
                              {"wind_persistence", p.wind_persistence},
                              {"price_base", p.price_base},
                              {"price_slope", p.price_slope},
                              {"price_noise", p.price_noise},
                              {"start_day", p.start_day}}}};
    }
    return doc;
}

Instance load_instance(const ExperimentConfig& config) {
    Instance inst;
    inst.spec = config.system;
    inst.spec.validate();
    if (config.timeseries_file) {
        inst.ts = load_timeseries(*config.timeseries_file, inst.spec);
    } else {
        inst.ts = generate_synthetic(inst.spec, config.synthetic.profile, config.synthetic.horizon,
                                     config.synthetic.seed);
    }
    if (config.scale_investment_to_horizon) {
        inst.spec = scale_investment(inst.spec, inst.ts.horizon());
    }
    inst.ts.validate(inst.spec);
    return inst;
}

bool BenchmarkReport::complete() const {
    return std::all_of(outcomes.begin(), outcomes.end(), [](const MethodOutcome& o) { return o.ok; });
}

std::uint64_t scenario_seed(std::uint64_t master, std::size_t scenario) { return ml::derive_seed(master, scenario); }

double quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw ValidationError("quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void emit_convergence_plotdata(const algorithm::RunResult& run, const std::filesystem::path& path) {
    if (run.iterations.empty()) {
        throw ValidationError("run has no iterations");
    }
    std::ostringstream ss;
    ss << "R,f_LB,f_UB\n";
    for (const auto& it : run.iterations) {
        ss << it.r << ',' << format_fixed(it.f_lb) << ',' << format_fixed(it.f_ub) << '\n';
    }
    write_text(path, ss.str());
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::optional<double> class_error(const gep::SystemSpec& spec, const std::vector<double>& x,
                                  const std::vector<double>& ref, bool vre) {
    double a = 0.0;
    double b = 0.0;
    for (std::size_t g = 0; g < spec.generators.size(); ++g) {
        if (spec.generators[g].is_vre == vre) {
            a += x[g];
            b += ref[g];
        }
    }
    if (b <= 0.0) {
        return std::nullopt;
    }
    return 100.0 * (a - b) / b;
}

std::string describe(const std::exception& e) {
    if (const auto* aborted = dynamic_cast<const algorithm::RunAborted*>(&e)) {
        try {
            std::rethrow_exception(aborted->cause());
        } catch (const SolverError&) {
            return std::string("solver failure: ") + e.what();
        } catch (...) {
        }
    }
    return e.what();
}

void run_scenario(const ExperimentConfig& config, const Instance& base, std::size_t s,
                  ScenarioOutcome& scenario, std::vector<MethodOutcome*> outcomes) {
    scenario.scenario = s + 1;
    scenario.seed = scenario_seed(config.seed, s);
    gep::TimeSeriesTable ts;
    try {
        auto columns = config.perturbed_columns;
        if (columns.empty()) {
            for (const auto& g : base.spec.generators) {
                if (g.is_vre) {
                    columns.push_back("F_" + g.name);
                }
            }
        }
        ts = perturb(base.ts, base.spec, columns, config.noise_lo, config.noise_hi, scenario.seed);
        ts.validate(base.spec);
        const auto start = std::chrono::steady_clock::now();
        const auto full = gep::solve_model(gep::build_full_model(base.spec, ts), config.algorithm.solver);
        scenario.full.seconds = seconds_since(start);
        scenario.full.objective = full.solution.objective;
        scenario.full.x = full.solution.x;
        scenario.full.lp_iterations = static_cast<std::size_t>(full.lp.iterations);
        scenario.ok = true;
    } catch (const std::exception& e) {
        scenario.error = e.what();
    }
    for (auto* o : outcomes) {
        o->scenario = s + 1;
        if (!scenario.ok) {
            o->error = "reference solve failed: " + scenario.error;
            continue;
        }
        auto cfg = config.algorithm;
        cfg.method = o->method;
        cfg.seed = ml::derive_seed(scenario.seed, 17 + static_cast<std::uint64_t>(o->method));
        try {
            auto result = algorithm::run(base.spec, ts, cfg);
            const auto& last = result.iterations.back();
            o->final_eps = last.eps;
            o->vre_error = class_error(base.spec, last.x_hat, scenario.full.x, true);
            o->thermal_error = class_error(base.spec, last.x_hat, scenario.full.x, false);
            o->seconds = result.t_features;
            for (const auto& it : result.iterations) {
                o->seconds += it.t_agg + it.t_ub;
            }
            o->time_ratio = scenario.full.seconds > 0.0 ? o->seconds / scenario.full.seconds : 0.0;
            o->run = std::move(result);
            o->ok = true;
        } catch (const std::exception& e) {
            o->error = describe(e);
        }
    }
}

std::string method_file_name(algorithm::Method m) { return algorithm::to_string(m); }

}  // namespace

nlohmann::json report_to_json(const ExperimentConfig& config, const BenchmarkReport& report) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json scenarios = nlohmann::json::array();
    for (const auto& s : report.scenarios) {
        nlohmann::json j = {{"scenario", s.scenario}, {"seed", s.seed}, {"status", s.ok ? "ok" : "failed"}};
        if (s.ok) {
            j["full_objective"] = s.full.objective;
            j["full_x"] = s.full.x;
            j["full_lp_iterations"] = s.full.lp_iterations;
        } else {
            j["error"] = s.error;
        }
        scenarios.push_back(j);
    }
    nlohmann::json results = nlohmann::json::array();
    nlohmann::json summary = nlohmann::json::object();
    for (auto m : config.methods) {
        std::vector<double> eps;
        std::vector<double> vre;
        std::vector<double> thermal;
        for (const auto& o : report.outcomes) {
            if (o.method != m) {
                continue;
            }
            nlohmann::json j = {{"method", algorithm::to_string(o.method)},
                                {"scenario", o.scenario},
                                {"status", o.ok ? "ok" : "failed"}};
            if (o.ok) {
                const auto& last = o.run->iterations.back();
                std::size_t lp_iterations = 0;
                for (const auto& it : o.run->iterations) {
                    lp_iterations += it.lp_iterations_agg + it.lp_iterations_ub;
                }
                j["final_eps_percent"] = o.final_eps;
                j["f_LB"] = last.f_lb;
                j["f_UB"] = last.f_ub;
                j["nonpositive_upper_bound"] = last.nonpositive_ub;
                j["iterations"] = o.run->iterations.size();
                j["R_final"] = last.r;
                j["R_total_final"] = last.r_total;
                j["termination"] = algorithm::to_string(o.run->termination);
                j["x_hat"] = last.x_hat;
                j["vre_investment_error_percent"] = opt(o.vre_error);
                j["thermal_investment_error_percent"] = opt(o.thermal_error);
                j["lp_iterations"] = lp_iterations;
                eps.push_back(o.final_eps);
                if (o.vre_error) {
                    vre.push_back(*o.vre_error);
                }
                if (o.thermal_error) {
                    thermal.push_back(*o.thermal_error);
                }
            } else {
                j["error"] = o.error;
            }
            results.push_back(j);
        }
        auto quartiles = [](const std::vector<double>& v) {
            if (v.empty()) {
                return nlohmann::json(nullptr);
            }
            return nlohmann::json{{"min", quantile(v, 0.0)},
                                  {"q1", quantile(v, 0.25)},
                                  {"median", quantile(v, 0.5)},
                                  {"q3", quantile(v, 0.75)},
                                  {"max", quantile(v, 1.0)}};
        };
        summary[algorithm::to_string(m)] = {{"completed", eps.size()},
                                            {"final_eps_percent", quartiles(eps)},
                                            {"vre_investment_error_percent", quartiles(vre)},
                                            {"thermal_investment_error_percent", quartiles(thermal)}};
    }
    auto embedded = experiment_to_json(config);
    embedded.erase("output_dir");
    embedded.erase("workers");
    return {{"schema", "mcbtsa.report/1"},
            {"note", "wall-clock timings and ratios are reported in timings.csv"},
            {"config", embedded},
            {"scenarios", scenarios},
            {"results", results},
            {"summary", summary},
            {"complete", report.complete()}};
}

BenchmarkReport run_benchmark(const ExperimentConfig& config) {
    config.validate();
    const auto base = load_instance(config);

    BenchmarkReport report;
    report.scenarios.resize(config.scenarios);
    report.outcomes.resize(config.methods.size() * config.scenarios);
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
        for (std::size_t s = 0; s < config.scenarios; ++s) {
            report.outcomes[m * config.scenarios + s].method = config.methods[m];
        }
    }
    auto task = [&](std::size_t s) {
        std::vector<MethodOutcome*> mine;
        for (std::size_t m = 0; m < config.methods.size(); ++m) {
            mine.push_back(&report.outcomes[m * config.scenarios + s]);
        }
        run_scenario(config, base, s, report.scenarios[s], mine);
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(config.scenarios)));
    if (workers == 1) {
        for (std::size_t s = 0; s < config.scenarios; ++s) {
            task(s);
        }
    } else {
        std::mutex mu;
        std::size_t next = 0;
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t s;
                    {
                        std::lock_guard<std::mutex> lock(mu);
                        if (next >= config.scenarios) {
                            return;
                        }
                        s = next++;
                    }
                    task(s);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    const auto& dir = config.output_dir;
    std::filesystem::create_directories(dir);
    std::ostringstream results;
    std::ostringstream timings;
    results << "method,scenario,status,final_eps_percent,f_LB,f_UB,iterations,R_final,termination,"
               "vre_investment_error_percent,thermal_investment_error_percent,full_objective\n";
    timings << "method,scenario,full_s,method_s,time_ratio\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_fixed(*v) : std::string(); };
    for (const auto& o : report.outcomes) {
        const auto name = algorithm::to_string(o.method);
        const auto& sc = report.scenarios[o.scenario - 1];
        if (o.ok) {
            const auto& last = o.run->iterations.back();
            std::ostringstream it;
            algorithm::write_iterations_csv(it, *o.run);
            write_text(dir / ("iterations_" + method_file_name(o.method) + "_" + std::to_string(o.scenario) + ".csv"),
                       it.str());
            if (o.scenario == 1) {
                emit_convergence_plotdata(*o.run, dir / ("convergence_" + method_file_name(o.method) + ".csv"));
            }
            results << name << ',' << o.scenario << ",ok," << format_fixed(o.final_eps) << ','
                    << format_fixed(last.f_lb) << ',' << format_fixed(last.f_ub) << ',' << o.run->iterations.size()
                    << ',' << last.r << ',' << algorithm::to_string(o.run->termination) << ',' << opt(o.vre_error)
                    << ',' << opt(o.thermal_error) << ',' << format_fixed(sc.full.objective) << '\n';
            timings << name << ',' << o.scenario << ',' << format_fixed(sc.full.seconds) << ','
                    << format_fixed(o.seconds) << ',' << format_fixed(o.time_ratio) << '\n';
        } else {
            results << name << ',' << o.scenario << ",failed,,,,,,,,," << (sc.ok ? format_fixed(sc.full.objective) : "")
                    << '\n';
            timings << name << ',' << o.scenario << ',' << (sc.ok ? format_fixed(sc.full.seconds) : "") << ",,\n";
        }
    }
    write_text(dir / "results.csv", results.str());
    write_text(dir / "timings.csv", timings.str());
    write_text(dir / "report.json", dump_json(report_to_json(config, report)) + "\n");
    return report;
}

}  // namespace mcbtsa::bench
