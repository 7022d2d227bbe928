#include <cmath>
#include <random>

#include "../support/random_gep.hpp"
#include "doctest.h"
#include "mcbtsa/error.hpp"
#include "mcbtsa/gep/model.hpp"

using namespace mcbtsa;
using namespace mcbtsa::gep;

namespace {

SystemSpec one_thermal(double c_op = 130.0, double c_inv = 1e5) {
    SystemSpec spec;
    spec.generators = {{"thermal", c_op, c_inv, false}};
    spec.c_ns = 5e3;
    spec.budget = 3e8;
    spec.delta = 1.0;
    return spec;
}

TimeSeriesTable series(const SystemSpec& spec, std::vector<double> demand) {
    TimeSeriesTable ts;
    ts.demand = std::move(demand);
    ts.price.assign(ts.demand.size(), 0.0);
    ts.capacity_factor.assign(spec.generators.size(), std::vector<double>(ts.demand.size(), 1.0));
    return ts;
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("aggregate_inputs averages each group") {
    SystemSpec spec = one_thermal();
    spec.generators.push_back({"pv", 1.0, 8e4, true});
    auto ts = series(spec, {10.0, 20.0, 30.0});
    ts.capacity_factor[1] = {0.2, 0.4, 0.9};
    ts.price = {1.0, 2.0, 6.0};
    const auto agg = Aggregation::from_block_lengths({2, 1});
    const auto hat = aggregate_inputs(ts, agg);
    CHECK(hat.horizon() == 2);
    CHECK(hat.demand == std::vector<double>{15.0, 30.0});
    CHECK(hat.capacity_factor[1][0] == doctest::Approx(0.3));
    CHECK(hat.price[0] == doctest::Approx(1.5));

    const auto same = aggregate_inputs(ts, Aggregation::identity(3));
    CHECK(same.demand == ts.demand);
    CHECK(same.capacity_factor == ts.capacity_factor);
    CHECK(same.price == ts.price);
}

TEST_CASE("aggregate_inputs rejects a non-partition") {
    const auto spec = one_thermal();
    const auto ts = series(spec, {1.0, 2.0, 3.0});
    CHECK_THROWS_AS(aggregate_inputs(ts, Aggregation::from_block_lengths({2})), InvalidAggregationError);
    Aggregation gap;
    gap.groups = {{0, 2}, {1}};
    gap.is_protected = {false, false};
    CHECK_THROWS_AS(aggregate_inputs(ts, gap), InvalidAggregationError);
}

TEST_CASE("weight conservation: sum of W_r * D_hat_r equals total demand") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = testing::random_spec(rng);
        const auto ts = testing::random_series(spec, 48, rng);
        const auto agg = Aggregation::from_block_lengths({5, 7, 1, 11, 24});
        const auto hat = aggregate_inputs(ts, agg);
        double total = 0.0;
        double weighted = 0.0;
        for (double d : ts.demand) {
            total += d;
        }
        const auto w = agg.weights();
        for (std::size_t r = 0; r < agg.size(); ++r) {
            weighted += w[r] * hat.demand[r];
        }
        CHECK(weighted == doctest::Approx(total).epsilon(1e-14));
    }
}

TEST_CASE("full model dimensions for one generator, no storage, two steps") {
    const auto spec = one_thermal();
    const auto model = build_full_model(spec, series(spec, {10.0, 20.0}));
    // x, p1, p2, ens1, ens2; balance x2; gen-limit x2 + budget.
    CHECK(model.problem.num_variables() == 5);
    CHECK(model.problem.equalities().size() == 2);
    CHECK(model.problem.inequalities().size() == 3);
    CHECK(model.problem.equalities().find("BALANCE(1)").has_value());
    CHECK(model.problem.inequalities().find("BUDGET").has_value());
}

TEST_CASE("single step with storage: cyclic boundary forces a balanced cycle") {
    SystemSpec spec = one_thermal(130.0, 0.0);
    spec.storages.push_back({"bess", 0.9, 0.8, 100.0, 5.0, 50.0, 50.0, 0.0});
    const auto ts = series(spec, {40.0});
    const auto model = build_full_model(spec, ts);
    const auto solved = solve_model(model);
    const auto& s = solved.solution;
    CHECK(s.e[0][0] == doctest::Approx(5.0));
    CHECK(s.e[0][1] == doctest::Approx(5.0));
    CHECK(0.9 * s.p_c[0][0] == doctest::Approx(s.p_d[0][0] / 0.8));
}

TEST_CASE("zero budget serves all demand through non-supplied energy") {
    SystemSpec spec = one_thermal();
    spec.budget = 0.0;
    const auto ts = series(spec, {10.0, 25.0});
    const auto solved = solve_model(build_full_model(spec, ts));
    CHECK(solved.solution.x[0] == doctest::Approx(0.0));
    CHECK(solved.solution.objective == doctest::Approx(5e3 * 35.0));
}

TEST_CASE("all-singleton aggregation builds the identical LP") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const auto spec = testing::random_spec(rng, 3, 2, trial % 2 == 1);
        const auto ts = testing::random_series(spec, 30, rng);
        const auto agg = Aggregation::identity(30);
        const auto full = build_full_model(spec, ts);
        const auto aggregated = build_aggregated_model(spec, aggregate_inputs(ts, agg), agg);
        const auto& a = full.problem;
        const auto& b = aggregated.problem;
        REQUIRE(a.num_variables() == b.num_variables());
        CHECK(a.cost() == b.cost());
        CHECK(a.lower() == b.lower());
        CHECK(a.upper() == b.upper());
        for (const auto* blocks : {&a.equalities(), &a.inequalities()}) {
            const auto& other = blocks == &a.equalities() ? b.equalities() : b.inequalities();
            REQUIRE(blocks->size() == other.size());
            for (lp::Index i = 0; i < blocks->size(); ++i) {
                CHECK(blocks->tag(i) == other.tag(i));
                CHECK(blocks->rhs(i) == other.rhs(i));
                const auto ra = blocks->row(i);
                const auto rb = other.row(i);
                REQUIRE(ra.size() == rb.size());
                for (std::size_t k = 0; k < ra.size(); ++k) {
                    CHECK(ra[k].column == rb[k].column);
                    CHECK(ra[k].coefficient == rb[k].coefficient);
                }
            }
        }
    }
}

TEST_CASE("aggregated weights scale costs and storage dynamics") {
    SystemSpec spec = one_thermal();
    spec.storages.push_back({"bess", 0.9, 0.9, 100.0, 0.0, 50.0, 50.0, 1.5});
    const auto ts = series(spec, {7.0, 7.0, 7.0});
    const auto agg = Aggregation::from_block_lengths({3});
    const auto model = build_aggregated_model(spec, aggregate_inputs(ts, agg), agg);
    CHECK(model.problem.cost()[static_cast<std::size_t>(model.layout.p(0, 0))] == doctest::Approx(3.0 * 130.0));

    const auto agg2 = Aggregation::from_block_lengths({2, 1});
    const auto m2 = build_aggregated_model(spec, aggregate_inputs(ts, agg2), agg2);
    const auto soc = m2.problem.equalities().find("SOC(bess,1)");
    REQUIRE(soc.has_value());
    // SOC increment for p_c = 1, p_d = 0 is eta_c * delta * W = 1.8 MWh.
    double pc_coef = 0.0;
    for (const auto& t : m2.problem.equalities().row(*soc)) {
        if (t.column == m2.layout.pc(0, 0)) {
            pc_coef = t.coefficient;
        }
    }
    CHECK(-pc_coef == doctest::Approx(1.8));
}

TEST_CASE("aggregated model rejects a horizon mismatch") {
    const auto spec = one_thermal();
    const auto ts = series(spec, {1.0, 2.0, 3.0});
    CHECK_THROWS_AS(build_aggregated_model(spec, ts, Aggregation::from_block_lengths({2, 1})),
                    InvalidAggregationError);
}

TEST_CASE("dispatch model at the optimum reproduces the optimal objective") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 8; ++trial) {
        const auto spec = testing::random_spec(rng);
        const auto ts = testing::random_series(spec, 36, rng);
        const auto full = solve_model(build_full_model(spec, ts));
        const auto fixed = solve_model(build_dispatch_model(spec, ts, full.solution.x));
        CHECK(rel_close(fixed.solution.objective, full.solution.objective, 1e-7));

        std::vector<double> smaller = full.solution.x;
        for (auto& v : smaller) {
            v *= 0.7;
        }
        const auto worse = solve_model(build_dispatch_model(spec, ts, smaller));
        CHECK(worse.solution.objective >= full.solution.objective * (1.0 - 1e-9));
    }
}

TEST_CASE("dispatch with no capacity pays the non-supplied penalty everywhere") {
    const auto spec = one_thermal();
    const auto ts = series(spec, {10.0, 20.0, 5.0});
    const std::vector<double> zero{0.0};
    const auto solved = solve_model(build_dispatch_model(spec, ts, zero));
    CHECK(solved.solution.objective == doctest::Approx(5e3 * 35.0));
}

TEST_CASE("dispatch rejects capacities above the budget") {
    const auto spec = one_thermal();
    const auto ts = series(spec, {10.0});
    const std::vector<double> too_much{4000.0};  // 4e8 > 3e8
    CHECK_THROWS_AS(build_dispatch_model(spec, ts, too_much), BudgetViolatedError);
}

TEST_CASE("objective evaluation") {
    const auto spec = one_thermal();
    GepSolution zero;
    zero.x = {0.0};
    zero.p = {{0.0}};
    zero.e_ns = {0.0};
    zero.o = {0.0};
    const auto ts = series(spec, {0.0});
    CHECK(evaluate_full_objective(spec, ts, zero) == 0.0);

    // One representative of weight 2: 10 * 1e5 + 2 * (1 * 130 * 5).
    auto ts2 = series(spec, {5.0, 5.0});
    const auto agg = Aggregation::from_block_lengths({2});
    const auto hat = aggregate_inputs(ts2, agg);
    GepSolution one = zero;
    one.x = {10.0};
    one.p = {{5.0}};
    CHECK(evaluate_aggregated_objective(spec, hat, agg, one) == doctest::Approx(1'001'300.0));

    GepSolution wrong = one;
    wrong.e_ns = {0.0, 0.0};
    CHECK_THROWS_AS(evaluate_aggregated_objective(spec, hat, agg, wrong), ValidationError);
}

TEST_CASE("solver solutions evaluate to the LP objective") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const auto spec = testing::random_spec(rng, 3, 2, trial % 3 == 0);
        const auto ts = testing::random_series(spec, 40, rng);
        const auto full = solve_model(build_full_model(spec, ts));
        CHECK(rel_close(evaluate_full_objective(spec, ts, full.solution), full.solution.objective, 1e-9));
        CHECK(max_balance_residual(spec, ts, full.solution) <= 1e-6);
        for (const auto& e : full.solution.e) {
            CHECK(e.front() == doctest::Approx(e.back()));
        }

        const auto agg = Aggregation::from_block_lengths({10, 3, 3, 14, 10});
        const auto hat = aggregate_inputs(ts, agg);
        const auto red = solve_model(build_aggregated_model(spec, hat, agg));
        CHECK(rel_close(evaluate_aggregated_objective(spec, hat, agg, red.solution), red.solution.objective, 1e-9));
        CHECK(max_balance_residual(spec, hat, red.solution) <= 1e-6);
    }
}

TEST_CASE("marginal cost equals the running cost when capacity is free") {
    SystemSpec spec = one_thermal(130.0, 0.0);
    for (double delta : {1.0, 0.5}) {
        spec.delta = delta;
        const auto ts = series(spec, {10.0, 30.0, 20.0});
        const auto model = build_full_model(spec, ts);
        const auto solved = solve_model(model);
        const auto mu = extract_marginal_costs(model.problem, solved.lp);
        REQUIRE(mu.horizon() == 3);
        for (double v : mu.values) {
            CHECK(v == doctest::Approx(130.0));
        }
    }
}

TEST_CASE("marginal cost equals the penalty where demand is unserved") {
    SystemSpec spec = one_thermal();
    spec.budget = 0.0;
    const auto ts = series(spec, {10.0, 30.0});
    const auto model = build_full_model(spec, ts);
    const auto mu = extract_marginal_costs(model.problem, solve_model(model).lp);
    CHECK(mu.values[0] == doctest::Approx(5e3));
    CHECK(mu.values[1] == doctest::Approx(5e3));
}

TEST_CASE("marginal costs need tags and an optimal solution") {
    lp::LpProblem p;
    p.add_variable("x", 1.0);
    lp::LpSolution s;
    s.status = lp::SolveStatus::Optimal;
    CHECK_THROWS_AS(extract_marginal_costs(p, s), ValidationError);
    s.status = lp::SolveStatus::Infeasible;
    CHECK_THROWS_AS(extract_marginal_costs(p, s), NotOptimalError);
}

TEST_CASE("marginal costs match finite differences of the optimum") {
    std::mt19937_64 rng(21);
    int checked = 0;
    for (int trial = 0; trial < 6; ++trial) {
        const auto spec = testing::random_spec(rng);
        auto ts = testing::random_series(spec, 24, rng);
        const auto model = build_full_model(spec, ts);
        const auto base = solve_model(model);
        const auto mu = extract_marginal_costs(model.problem, base.lp);
        for (std::size_t t = 0; t < ts.horizon(); t += 5) {
            const double dt = 1e-4 * ts.demand[t];
            auto up = ts;
            up.demand[t] += dt;
            auto down = ts;
            down.demand[t] -= dt;
            const double f_up = solve_model(build_full_model(spec, up)).solution.objective;
            const double f_down = solve_model(build_full_model(spec, down)).solution.objective;
            const double q_up = (f_up - base.solution.objective) / dt;
            const double q_down = (base.solution.objective - f_down) / dt;
            if (std::abs(q_up - q_down) > 1e-3 * std::max(1.0, std::abs(q_up))) {
                continue;  // kink: the active set changes within dt
            }
            ++checked;
            CHECK(rel_close(q_up, mu.values[t], 1e-3));
        }
    }
    CHECK(checked > 5);
}

TEST_CASE("expanded marginal costs divide by the weight") {
    MarginalCostSeries rep{{260.0, 5.0}};
    const auto agg = Aggregation::from_block_lengths({2, 1});
    const auto mu = expand_marginal_costs(rep, agg, 3);
    CHECK(mu.values == std::vector<double>{130.0, 130.0, 5.0});
}

TEST_CASE("specification validation") {
    SystemSpec spec = one_thermal();
    spec.delta = 0.0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = one_thermal();
    spec.generators.clear();
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = one_thermal();
    spec.storages.push_back({"bess", 1.2, 0.9, 10.0, 0.0, 1.0, 1.0, 0.0});
    CHECK_THROWS_AS(spec.validate(), ValidationError);

    spec = one_thermal();
    spec.market_participation = true;
    auto ts = series(spec, {1.0});
    ts.price = {6e3};
    CHECK_THROWS_AS(ts.validate(spec), ValidationError);
    ts.price = {60.0};
    ts.capacity_factor[0] = {1.2};
    CHECK_THROWS_AS(ts.validate(spec), ValidationError);
}
