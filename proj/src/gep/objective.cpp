#include <cmath>

#include "mcbtsa/error.hpp"
#include "mcbtsa/gep/model.hpp"

namespace mcbtsa::gep {
namespace {

void check_shape(const SystemSpec& spec, const GepSolution& sol, std::size_t K) {
    const auto G = spec.generators.size();
    const auto S = spec.storages.size();
    bool ok = sol.x.size() == G && sol.p.size() == G && sol.p_d.size() == S && sol.p_c.size() == S &&
              sol.e.size() == S && sol.e_ns.size() == K && sol.o.size() == K;
    for (const auto& v : sol.p) {
        ok = ok && v.size() == K;
    }
    for (std::size_t s = 0; ok && s < S; ++s) {
        ok = sol.p_d[s].size() == K && sol.p_c[s].size() == K && sol.e[s].size() == K + 1;
    }
    if (!ok) {
        throw ValidationError("solution shape does not match the model horizon of " + std::to_string(K));
    }
}

double weighted_objective(const SystemSpec& spec, const TimeSeriesTable& ts, const std::vector<double>& weights,
                          const GepSolution& sol) {
    double total = 0.0;
    for (std::size_t g = 0; g < spec.generators.size(); ++g) {
        total += spec.generators[g].c_inv * sol.x[g];
    }
    for (std::size_t k = 0; k < weights.size(); ++k) {
        double step = 0.0;
        for (std::size_t g = 0; g < spec.generators.size(); ++g) {
            step += spec.delta * spec.generators[g].c_op * sol.p[g][k];
        }
        for (std::size_t s = 0; s < spec.storages.size(); ++s) {
            step += spec.delta * spec.storages[s].c_d * sol.p_d[s][k];
        }
        step += spec.c_ns * sol.e_ns[k];
        if (spec.market_participation) {
            step -= ts.price[k] * sol.o[k];
        }
        total += weights[k] * step;
    }
    return total;
}

}  // namespace

double evaluate_full_objective(const SystemSpec& spec, const TimeSeriesTable& ts, const GepSolution& sol) {
    check_shape(spec, sol, ts.horizon());
    return weighted_objective(spec, ts, std::vector<double>(ts.horizon(), 1.0), sol);
}

double evaluate_aggregated_objective(const SystemSpec& spec, const TimeSeriesTable& ts_hat, const Aggregation& agg,
                                     const GepSolution& sol) {
    if (ts_hat.horizon() != agg.size()) {
        throw InvalidAggregationError("aggregated inputs do not match the aggregation");
    }
    check_shape(spec, sol, agg.size());
    return weighted_objective(spec, ts_hat, agg.weights(), sol);
}

double max_balance_residual(const SystemSpec& spec, const TimeSeriesTable& ts, const GepSolution& sol) {
    check_shape(spec, sol, ts.horizon());
    double worst = 0.0;
    for (std::size_t k = 0; k < ts.horizon(); ++k) {
        double supply = sol.e_ns[k] - sol.o[k];
        for (std::size_t g = 0; g < spec.generators.size(); ++g) {
            supply += sol.p[g][k] * spec.delta;
        }
        for (std::size_t s = 0; s < spec.storages.size(); ++s) {
            supply += (sol.p_d[s][k] - sol.p_c[s][k]) * spec.delta;
        }
        worst = std::max(worst, std::abs(supply - ts.demand[k]));
    }
    return worst;
}

}  // namespace mcbtsa::gep
