#pragma once

#include <span>
#include <vector>

#include "mcbtsa/gep/types.hpp"
#include "mcbtsa/lp/problem.hpp"
#include "mcbtsa/lp/solver.hpp"

namespace mcbtsa::gep {

/// Column positions of each decision family inside the LP.
struct ModelLayout {
    std::size_t generators = 0;
    std::size_t storages = 0;
    std::size_t horizon = 0;
    bool has_market = false;
    /// -1 when capacities are fixed (dispatch model).
    lp::Index x_begin = -1;
    lp::Index p_begin = 0;
    lp::Index pc_begin = 0;
    lp::Index pd_begin = 0;
    lp::Index e_begin = 0;
    lp::Index ens_begin = 0;
    lp::Index o_begin = -1;
    /// Row index of BALANCE(k) among the equality rows.
    std::vector<lp::Index> balance_rows;
    /// Capacities used when x is fixed.
    std::vector<double> fixed_x;
    std::vector<double> e_min;

    lp::Index p(std::size_t g, std::size_t k) const { return p_begin + static_cast<lp::Index>(g * horizon + k); }
    lp::Index pc(std::size_t s, std::size_t k) const { return pc_begin + static_cast<lp::Index>(s * horizon + k); }
    lp::Index pd(std::size_t s, std::size_t k) const { return pd_begin + static_cast<lp::Index>(s * horizon + k); }
    /// k in 1..horizon; e(s, 0) is not a column.
    lp::Index e(std::size_t s, std::size_t k) const {
        return e_begin + static_cast<lp::Index>(s * horizon + k - 1);
    }
    lp::Index ens(std::size_t k) const { return ens_begin + static_cast<lp::Index>(k); }
    lp::Index o(std::size_t k) const { return o_begin + static_cast<lp::Index>(k); }
};

struct GepModel {
    lp::LpProblem problem;
    ModelLayout layout;
};

/// Group means of F, D and price (or medoid values for Medoid aggregations).
TimeSeriesTable aggregate_inputs(const TimeSeriesTable& ts, const Aggregation& agg);

GepModel build_full_model(const SystemSpec& spec, const TimeSeriesTable& ts);

/// Aggregated model over representatives; ts_hat has one step per group.
GepModel build_aggregated_model(const SystemSpec& spec, const TimeSeriesTable& ts_hat,
                                const Aggregation& agg);

/// Full-horizon operation with capacities fixed. Generation limits become
/// column bounds and the investment cost of x_fixed is the objective offset.
/// Throws BudgetViolatedError when x_fixed costs more than the budget.
GepModel build_dispatch_model(const SystemSpec& spec, const TimeSeriesTable& ts,
                              std::span<const double> x_fixed);

GepSolution decode_solution(const GepModel& model, const lp::LpSolution& solution);

struct SolvedModel {
    GepSolution solution;
    lp::LpSolution lp;
};

/// Solves and decodes; throws NotOptimalError unless the LP is optimal.
SolvedModel solve_model(const GepModel& model, const lp::SolverOptions& options = {});

double evaluate_full_objective(const SystemSpec& spec, const TimeSeriesTable& ts, const GepSolution& sol);
double evaluate_aggregated_objective(const SystemSpec& spec, const TimeSeriesTable& ts_hat,
                                     const Aggregation& agg, const GepSolution& sol);

/// Duals of the BALANCE(k) rows in step order, d(objective)/d(rhs).
/// Throws ValidationError when tags are missing and NotOptimalError when the
/// solution is not optimal.
MarginalCostSeries extract_marginal_costs(const lp::LpProblem& problem, const lp::LpSolution& solution);

/// Per-MWh marginal cost of each original step under an aggregated model:
/// the representative's balance dual divided by its weight.
MarginalCostSeries expand_marginal_costs(const MarginalCostSeries& representative, const Aggregation& agg,
                                         std::size_t horizon);

/// Largest |balance residual| of a decoded solution, MWh.
double max_balance_residual(const SystemSpec& spec, const TimeSeriesTable& ts, const GepSolution& sol);

}  // namespace mcbtsa::gep
