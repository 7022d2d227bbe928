#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "mcbtsa/lp/problem.hpp"

namespace mcbtsa::lp {

enum class PricingRule { Devex, Dantzig };

struct SolverOptions {
    std::string backend = "simplex";
    std::size_t max_iterations = 2'000'000;
    /// Absolute tolerance on primal residuals and bound violations.
    double feasibility_tolerance = 1e-7;
    /// Reduced-cost tolerance, scaled by max(1, |c|_inf).
    double optimality_tolerance = 1e-9;
    double pivot_tolerance = 1e-9;
    std::size_t refactor_interval = 100;
    /// Consecutive degenerate pivots before switching to Bland's rule.
    std::size_t bland_after = 100;
    PricingRule pricing = PricingRule::Devex;
};

struct BackendCapabilities {
    bool returns_duals = false;
};

/// Contract every LP backend fulfils. Backends must be deterministic for a
/// given problem and option set.
class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    virtual BackendCapabilities capabilities() const = 0;
    virtual LpSolution solve(const LpProblem& problem, const SolverOptions& options) const = 0;
};

/// Adds a backend to the process-wide registry. Throws ValidationError when
/// the backend cannot return equality-row duals or the name is taken.
void register_backend(std::shared_ptr<const SolverBackend> backend);
std::shared_ptr<const SolverBackend> find_backend(const std::string& name);
std::vector<std::string> backend_names();

/// Solves with the backend named in the options ("simplex" is always present).
///
/// Infeasible and unbounded outcomes come back as a status; iteration limits
/// and numerical breakdowns throw IterationLimitError / NumericalFailureError.
LpSolution solve(const LpProblem& problem, const SolverOptions& options = {});

/// The bundled two-phase bounded revised simplex.
LpSolution simplex_solve(const LpProblem& problem, const SolverOptions& options = {});

struct KktReport {
    double max_primal_residual = 0.0;
    double max_dual_residual = 0.0;
    double max_cs_violation = 0.0;
    /// |primal objective - dual objective|.
    double duality_gap = 0.0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;

    double relative_duality_gap() const;
};

/// First-order optimality diagnostics for a claimed optimal pair. Never throws.
KktReport check_kkt(const LpProblem& problem, const LpSolution& solution);

/// Exhaustive vertex enumeration, for cross-checking on tiny problems.
/// Throws ValidationError above `max_variables` columns.
LpSolution brute_force_solve(const LpProblem& problem, int max_variables = 10);

/// Writes the problem in CPLEX LP text format; numbers use 17 significant digits.
std::string to_lp_format(const LpProblem& problem);

}  // namespace mcbtsa::lp
