#include "mcbtsa/gep/model.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "mcbtsa/error.hpp"

namespace mcbtsa::gep {
namespace {

using lp::Index;
using lp::Term;

std::string tag(const char* family, const std::string& unit, std::size_t k) {
    return std::string(family) + "(" + unit + "," + std::to_string(k + 1) + ")";
}

std::string tag(const char* family, std::size_t k) {
    return std::string(family) + "(" + std::to_string(k + 1) + ")";
}

/// Shared builder: K representative steps with weights; x either free
/// (investment model) or fixed (dispatch model).
GepModel build(const SystemSpec& spec, const TimeSeriesTable& ts, const std::vector<double>& weights,
               std::optional<std::span<const double>> fixed_x) {
    spec.validate();
    ts.validate(spec);
    const std::size_t G = spec.generators.size();
    const std::size_t S = spec.storages.size();
    const std::size_t K = ts.horizon();
    const double delta = spec.delta;

    GepModel model;
    auto& lp = model.problem;
    auto& L = model.layout;
    L.generators = G;
    L.storages = S;
    L.horizon = K;
    L.has_market = spec.market_participation;
    for (const auto& s : spec.storages) {
        L.e_min.push_back(s.e_min);
    }

    double investment = 0.0;
    if (fixed_x) {
        L.fixed_x.assign(fixed_x->begin(), fixed_x->end());
        for (std::size_t g = 0; g < G; ++g) {
            investment += spec.generators[g].c_inv * L.fixed_x[g];
        }
        lp.set_objective_offset(investment);
    } else {
        L.x_begin = lp.num_variables();
        for (const auto& g : spec.generators) {
            lp.add_variable("x(" + g.name + ")", g.c_inv);
        }
    }

    L.p_begin = lp.num_variables();
    for (std::size_t g = 0; g < G; ++g) {
        const auto& gen = spec.generators[g];
        for (std::size_t k = 0; k < K; ++k) {
            double upper = lp::kInfinity;
            if (fixed_x) {
                upper = TimeSeriesTable::effective_factor(spec, ts, g, k) * L.fixed_x[g];
            }
            lp.add_variable(tag("p", gen.name, k), weights[k] * delta * gen.c_op, 0.0, upper);
        }
    }
    L.pc_begin = lp.num_variables();
    for (const auto& s : spec.storages) {
        for (std::size_t k = 0; k < K; ++k) {
            lp.add_variable(tag("pc", s.name, k), 0.0, 0.0, s.p_c_max);
        }
    }
    L.pd_begin = lp.num_variables();
    for (const auto& s : spec.storages) {
        for (std::size_t k = 0; k < K; ++k) {
            lp.add_variable(tag("pd", s.name, k), weights[k] * delta * s.c_d, 0.0, s.p_d_max);
        }
    }
    L.e_begin = lp.num_variables();
    for (const auto& s : spec.storages) {
        for (std::size_t k = 0; k < K; ++k) {
            const bool last = k + 1 == K;
            lp.add_variable(tag("e", s.name, k), 0.0, s.e_min, last ? s.e_min : s.e_max);
        }
    }
    L.ens_begin = lp.num_variables();
    for (std::size_t k = 0; k < K; ++k) {
        lp.add_variable(tag("ens", k), weights[k] * spec.c_ns);
    }
    if (spec.market_participation) {
        L.o_begin = lp.num_variables();
        for (std::size_t k = 0; k < K; ++k) {
            lp.add_variable(tag("o", k), -weights[k] * ts.price[k]);
        }
    }

    std::vector<Term> row;
    L.balance_rows.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        row.clear();
        for (std::size_t g = 0; g < G; ++g) {
            row.push_back({L.p(g, k), delta});
        }
        for (std::size_t s = 0; s < S; ++s) {
            row.push_back({L.pd(s, k), delta});
            row.push_back({L.pc(s, k), -delta});
        }
        row.push_back({L.ens(k), 1.0});
        if (spec.market_participation) {
            row.push_back({L.o(k), -1.0});
        }
        L.balance_rows.push_back(lp.add_equality(tag("BALANCE", k), row, ts.demand[k]));
    }
    for (std::size_t s = 0; s < S; ++s) {
        const auto& st = spec.storages[s];
        for (std::size_t k = 0; k < K; ++k) {
            // e_k - e_{k-1} - eta_c*dt*W*pc + dt*W/eta_d*pd = 0, e_0 = e_min.
            const double scale = delta * weights[k];
            row.clear();
            row.push_back({L.e(s, k + 1), 1.0});
            double rhs = 0.0;
            if (k == 0) {
                rhs = st.e_min;
            } else {
                row.push_back({L.e(s, k), -1.0});
            }
            row.push_back({L.pc(s, k), -st.eta_c * scale});
            row.push_back({L.pd(s, k), scale / st.eta_d});
            lp.add_equality(tag("SOC", st.name, k), row, rhs);
        }
    }
    if (!fixed_x) {
        for (std::size_t g = 0; g < G; ++g) {
            const auto& gen = spec.generators[g];
            for (std::size_t k = 0; k < K; ++k) {
                const double f = TimeSeriesTable::effective_factor(spec, ts, g, k);
                lp.add_inequality(tag("GEN", gen.name, k), {{L.p(g, k), 1.0}, {L.x_begin + static_cast<Index>(g), -f}},
                                  0.0);
            }
        }
        row.clear();
        for (std::size_t g = 0; g < G; ++g) {
            row.push_back({L.x_begin + static_cast<Index>(g), spec.generators[g].c_inv});
        }
        lp.add_inequality("BUDGET", row, spec.budget);
    }
    return model;
}

}  // namespace

TimeSeriesTable aggregate_inputs(const TimeSeriesTable& ts, const Aggregation& agg) {
    agg.validate(ts.horizon());
    TimeSeriesTable out;
    const std::size_t R = agg.size();
    out.capacity_factor.assign(ts.capacity_factor.size(), std::vector<double>(R, 0.0));
    out.demand.assign(R, 0.0);
    out.price.assign(R, 0.0);
    const bool has_price = ts.price.size() == ts.horizon();
    for (std::size_t r = 0; r < R; ++r) {
        const auto& group = agg.groups[r];
        if (agg.representation == Representation::Medoid) {
            const auto t = agg.medoids[r];
            for (std::size_t g = 0; g < ts.capacity_factor.size(); ++g) {
                out.capacity_factor[g][r] = ts.capacity_factor[g][t];
            }
            out.demand[r] = ts.demand[t];
            out.price[r] = has_price ? ts.price[t] : 0.0;
            continue;
        }
        const double w = static_cast<double>(group.size());
        for (std::size_t g = 0; g < ts.capacity_factor.size(); ++g) {
            double sum = 0.0;
            for (auto t : group) {
                sum += ts.capacity_factor[g][t];
            }
            out.capacity_factor[g][r] = sum / w;
        }
        double d = 0.0;
        double pi = 0.0;
        for (auto t : group) {
            d += ts.demand[t];
            pi += has_price ? ts.price[t] : 0.0;
        }
        out.demand[r] = d / w;
        out.price[r] = pi / w;
    }
    return out;
}

GepModel build_full_model(const SystemSpec& spec, const TimeSeriesTable& ts) {
    return build(spec, ts, std::vector<double>(ts.horizon(), 1.0), std::nullopt);
}

GepModel build_aggregated_model(const SystemSpec& spec, const TimeSeriesTable& ts_hat, const Aggregation& agg) {
    if (ts_hat.horizon() != agg.size()) {
        throw InvalidAggregationError("aggregated inputs have " + std::to_string(ts_hat.horizon()) +
                                      " steps but the aggregation has " + std::to_string(agg.size()) +
                                      " groups");
    }
    return build(spec, ts_hat, agg.weights(), std::nullopt);
}

GepModel build_dispatch_model(const SystemSpec& spec, const TimeSeriesTable& ts, std::span<const double> x_fixed) {
    spec.validate();
    if (x_fixed.size() != spec.generators.size()) {
        throw ValidationError("dispatch model: one fixed capacity per generator is required");
    }
    double investment = 0.0;
    for (std::size_t g = 0; g < x_fixed.size(); ++g) {
        if (!std::isfinite(x_fixed[g]) || x_fixed[g] < 0.0) {
            throw ValidationError("dispatch model: fixed capacities must be finite and nonnegative");
        }
        investment += spec.generators[g].c_inv * x_fixed[g];
    }
    // Capacities from an LP solve may exceed the budget by solver round-off.
    if (investment > spec.budget + 1e-7 * std::max(1.0, spec.budget)) {
        throw BudgetViolatedError("fixed capacities cost " + std::to_string(investment) +
                                  ", above the budget of " + std::to_string(spec.budget));
    }
    return build(spec, ts, std::vector<double>(ts.horizon(), 1.0), x_fixed);
}

GepSolution decode_solution(const GepModel& model, const lp::LpSolution& solution) {
    const auto& L = model.layout;
    const auto& v = solution.primal;
    GepSolution out;
    out.objective = solution.objective;
    if (L.x_begin >= 0) {
        for (std::size_t g = 0; g < L.generators; ++g) {
            out.x.push_back(v[static_cast<std::size_t>(L.x_begin) + g]);
        }
    } else {
        out.x = L.fixed_x;
    }
    const std::size_t K = L.horizon;
    auto take = [&](Index j) { return v[static_cast<std::size_t>(j)]; };
    out.p.assign(L.generators, std::vector<double>(K));
    for (std::size_t g = 0; g < L.generators; ++g) {
        for (std::size_t k = 0; k < K; ++k) {
            out.p[g][k] = take(L.p(g, k));
        }
    }
    out.p_c.assign(L.storages, std::vector<double>(K));
    out.p_d.assign(L.storages, std::vector<double>(K));
    out.e.assign(L.storages, std::vector<double>(K + 1));
    for (std::size_t s = 0; s < L.storages; ++s) {
        out.e[s][0] = L.e_min[s];
        for (std::size_t k = 0; k < K; ++k) {
            out.p_c[s][k] = take(L.pc(s, k));
            out.p_d[s][k] = take(L.pd(s, k));
            out.e[s][k + 1] = take(L.e(s, k + 1));
        }
    }
    out.e_ns.resize(K);
    out.o.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        out.e_ns[k] = take(L.ens(k));
        if (L.has_market) {
            out.o[k] = take(L.o(k));
        }
    }
    return out;
}

SolvedModel solve_model(const GepModel& model, const lp::SolverOptions& options) {
    auto lp_solution = lp::solve(model.problem, options);
    if (lp_solution.status != lp::SolveStatus::Optimal) {
        throw NotOptimalError(std::string("GEP model is ") + lp::to_string(lp_solution.status));
    }
    auto decoded = decode_solution(model, lp_solution);
    return {std::move(decoded), std::move(lp_solution)};
}

MarginalCostSeries extract_marginal_costs(const lp::LpProblem& problem, const lp::LpSolution& solution) {
    if (solution.status != lp::SolveStatus::Optimal) {
        throw NotOptimalError("marginal costs need an optimal solution");
    }
    const auto& eq = problem.equalities();
    if (solution.eq_duals.size() != static_cast<std::size_t>(eq.size())) {
        throw ValidationError("solution does not carry one dual per equality row");
    }
    MarginalCostSeries mu;
    for (std::size_t k = 0;; ++k) {
        const auto row = eq.find(tag("BALANCE", k));
        if (!row) {
            break;
        }
        mu.values.push_back(solution.eq_duals[static_cast<std::size_t>(*row)]);
    }
    if (mu.values.empty()) {
        throw ValidationError("problem has no BALANCE rows");
    }
    return mu;
}

MarginalCostSeries expand_marginal_costs(const MarginalCostSeries& representative, const Aggregation& agg,
                                         std::size_t horizon) {
    agg.validate(horizon);
    if (representative.horizon() != agg.size()) {
        throw InvalidAggregationError("marginal costs do not match the aggregation");
    }
    MarginalCostSeries out;
    out.values.assign(horizon, 0.0);
    for (std::size_t r = 0; r < agg.size(); ++r) {
        const double per_step = representative.values[r] / static_cast<double>(agg.groups[r].size());
        for (auto t : agg.groups[r]) {
            out.values[t] = per_step;
        }
    }
    return out;
}

}  // namespace mcbtsa::gep
