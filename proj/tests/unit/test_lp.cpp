#include <cmath>
#include <random>

#include "../support/random_lp.hpp"
#include "doctest.h"
#include "mcbtsa/error.hpp"
#include "mcbtsa/lp/solver.hpp"

using namespace mcbtsa;
using namespace mcbtsa::lp;

namespace {

LpProblem min_x_ge_3() {
    LpProblem p;
    const auto x = p.add_variable("x", 1.0);
    p.add_inequality("c", {{x, -1.0}}, -3.0);
    return p;
}

LpProblem min_neg_x_le_5() {
    LpProblem p;
    const auto x = p.add_variable("x", -1.0);
    p.add_inequality("cap", {{x, 1.0}}, 5.0);
    return p;
}

}  // namespace

TEST_CASE("min x s.t. x >= 3") {
    const auto s = solve(min_x_ge_3());
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.primal[0] == doctest::Approx(3.0));
    CHECK(s.objective == doctest::Approx(3.0));
}

TEST_CASE("min -x s.t. x <= 5 has unit dual on the cap row") {
    const auto s = solve(min_neg_x_le_5());
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.primal[0] == doctest::Approx(5.0));
    CHECK(s.ub_duals[0] == doctest::Approx(1.0));
}

TEST_CASE("equality duals are objective sensitivities") {
    // min 2a + 3b  s.t. a + b = 4, a <= 1  -> a = 1, b = 3, y = 3, lambda = 1
    LpProblem p;
    const auto a = p.add_variable("a", 2.0);
    const auto b = p.add_variable("b", 3.0);
    p.add_equality("sum", {{a, 1.0}, {b, 1.0}}, 4.0);
    p.add_inequality("acap", {{a, 1.0}}, 1.0);
    const auto s = solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(11.0));
    CHECK(s.eq_duals[0] == doctest::Approx(3.0));
    CHECK(s.ub_duals[0] == doctest::Approx(1.0));
    const auto kkt = check_kkt(p, s);
    CHECK(kkt.max_primal_residual <= 1e-9);
    CHECK(kkt.max_dual_residual <= 1e-9);
    CHECK(kkt.max_cs_violation <= 1e-9);
    CHECK(kkt.duality_gap <= 1e-9);
}

TEST_CASE("infeasible and unbounded statuses") {
    LpProblem inf;
    const auto x = inf.add_variable("x", 1.0, 0.0, 2.0);
    inf.add_inequality("lo", {{x, -1.0}}, -3.0);
    CHECK(solve(inf).status == SolveStatus::Infeasible);
    CHECK(brute_force_solve(inf).status == SolveStatus::Infeasible);

    LpProblem unb;
    const auto y = unb.add_variable("y", -1.0);
    const auto z = unb.add_variable("z", 0.0);
    unb.add_inequality("r", {{y, 1.0}, {z, -1.0}}, 1.0);
    CHECK(solve(unb).status == SolveStatus::Unbounded);
    CHECK(brute_force_solve(unb).status == SolveStatus::Unbounded);
}

TEST_CASE("free variables and negative lower bounds") {
    // min |t| style: min u + v, t - u + v = -2.5, t free, t >= -1 via row
    LpProblem p;
    const auto t = p.add_variable("t", 0.0, -kInfinity, kInfinity);
    const auto u = p.add_variable("u", 1.0);
    const auto v = p.add_variable("v", 1.0);
    p.add_equality("split", {{t, 1.0}, {u, -1.0}, {v, 1.0}}, 0.0);
    p.add_inequality("floor", {{t, -1.0}}, 2.5);
    p.add_inequality("ceil", {{t, 1.0}}, -1.0);
    const auto s = solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(1.0));
    CHECK(s.primal[0] == doctest::Approx(-1.0));
    CHECK(brute_force_solve(p).objective == doctest::Approx(1.0));
}

TEST_CASE("brute force agrees on the trivial LPs") {
    for (const auto& p : {min_x_ge_3(), min_neg_x_le_5()}) {
        const auto a = solve(p);
        const auto b = brute_force_solve(p);
        REQUIRE(b.status == SolveStatus::Optimal);
        CHECK(a.objective == doctest::Approx(b.objective));
        CHECK(a.primal[0] == doctest::Approx(b.primal[0]));
    }
    CHECK(brute_force_solve(min_neg_x_le_5()).ub_duals[0] == doctest::Approx(1.0));
}

TEST_CASE("redundant equality row: objectives agree") {
    LpProblem p;
    const auto a = p.add_variable("a", 1.0, 0.0, 10.0);
    const auto b = p.add_variable("b", 2.0, 0.0, 10.0);
    p.add_equality("r1", {{a, 1.0}, {b, 1.0}}, 3.0);
    p.add_equality("r2", {{a, 2.0}, {b, 2.0}}, 6.0);
    p.add_inequality("acap", {{a, 1.0}}, 2.0);
    const auto s = solve(p);
    const auto o = brute_force_solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    REQUIRE(o.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(4.0));
    CHECK(o.objective == doctest::Approx(4.0));
    CHECK(check_kkt(p, s).relative_duality_gap() <= 1e-9);
}

TEST_CASE("brute force refuses large problems") {
    LpProblem p;
    for (int j = 0; j < 11; ++j) {
        p.add_variable("x" + std::to_string(j), 1.0, 0.0, 1.0);
    }
    CHECK_THROWS_AS(brute_force_solve(p), ValidationError);
}

TEST_CASE("check_kkt flags perturbed primal and flipped dual") {
    LpProblem p;
    const auto a = p.add_variable("a", 0.5);
    const auto b = p.add_variable("b", 3.0);
    p.add_equality("sum", {{a, 1.0}, {b, 4.0}}, 13.0);
    p.add_inequality("acap", {{a, 1.0}}, 1.0);
    auto s = solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    const auto clean = check_kkt(p, s);
    CHECK(clean.max_primal_residual <= 1e-9);
    CHECK(clean.duality_gap <= 1e-9);

    auto perturbed = s;
    perturbed.primal[1] += 1e-3;  // column of b has largest entry 4
    CHECK(check_kkt(p, perturbed).max_primal_residual == doctest::Approx(4e-3));

    auto flipped = s;
    flipped.ub_duals[0] = -flipped.ub_duals[0];
    CHECK(flipped.ub_duals[0] < 0.0);
    CHECK(check_kkt(p, flipped).max_dual_residual > 0.0);
}

TEST_CASE("mismatched solution shape is reported, not thrown") {
    LpSolution empty;
    const auto r = check_kkt(min_x_ge_3(), empty);
    CHECK(std::isinf(r.max_primal_residual));
}

TEST_CASE("iteration limit is surfaced as an error") {
    SolverOptions opt;
    opt.max_iterations = 0;
    CHECK_THROWS_AS(solve(min_neg_x_le_5(), opt), IterationLimitError);
}

TEST_CASE("backend registry rejects backends without duals") {
    struct NoDuals final : SolverBackend {
        std::string name() const override { return "no-duals"; }
        BackendCapabilities capabilities() const override { return {.returns_duals = false}; }
        LpSolution solve(const LpProblem&, const SolverOptions&) const override { return {}; }
    };
    CHECK_THROWS_AS(register_backend(std::make_shared<NoDuals>()), ValidationError);
    CHECK(find_backend("simplex") != nullptr);
    SolverOptions opt;
    opt.backend = "missing";
    CHECK_THROWS_AS(solve(min_x_ge_3(), opt), ValidationError);
}

TEST_CASE("duplicate row tags are rejected") {
    LpProblem p;
    const auto x = p.add_variable("x", 1.0);
    p.add_equality("r", {{x, 1.0}}, 1.0);
    CHECK_THROWS_AS(p.add_inequality("r", {{x, 1.0}}, 1.0), ValidationError);
}

TEST_CASE("LP text export") {
    const auto text = to_lp_format(min_neg_x_le_5());
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("cap: 1 x <= 5") != std::string::npos);
}

TEST_CASE("random small LPs match vertex enumeration") {
    std::mt19937_64 rng(20240611);
    int optimal = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = testing::random_small_lp(rng);
        const auto s = solve(p);
        const auto o = brute_force_solve(p);
        CAPTURE(trial);
        REQUIRE(s.status == o.status);
        if (s.status == SolveStatus::Optimal) {
            ++optimal;
            CHECK(std::abs(s.objective - o.objective) <= 1e-8 * (1.0 + std::abs(o.objective)));
            const auto kkt = check_kkt(p, s);
            CHECK(kkt.max_primal_residual <= 1e-7);
            CHECK(kkt.max_dual_residual <= 1e-7);
            CHECK(kkt.relative_duality_gap() <= 1e-7);
        }
    }
    CHECK(optimal > 50);
}

TEST_CASE("solve is deterministic") {
    std::mt19937_64 rng(7);
    const auto p = testing::random_small_lp(rng);
    const auto a = solve(p);
    const auto b = solve(p);
    CHECK(a.status == b.status);
    CHECK(a.primal == b.primal);
    CHECK(a.eq_duals == b.eq_duals);
    CHECK(a.ub_duals == b.ub_duals);
}
