#include "mcbtsa/lp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>

#include "mcbtsa/error.hpp"

namespace mcbtsa::lp {
namespace {

class BundledSimplexBackend final : public SolverBackend {
public:
    std::string name() const override { return "simplex"; }
    BackendCapabilities capabilities() const override { return {.returns_duals = true}; }
    LpSolution solve(const LpProblem& problem, const SolverOptions& options) const override {
        return simplex_solve(problem, options);
    }
};

struct Registry {
    std::mutex mutex;
    std::unordered_map<std::string, std::shared_ptr<const SolverBackend>> backends;

    Registry() {
        auto bundled = std::make_shared<BundledSimplexBackend>();
        backends.emplace(bundled->name(), std::move(bundled));
    }
};

Registry& registry() {
    static Registry instance;
    return instance;
}

}  // namespace

void register_backend(std::shared_ptr<const SolverBackend> backend) {
    if (!backend) {
        throw ValidationError("cannot register a null solver backend");
    }
    if (!backend->capabilities().returns_duals) {
        throw ValidationError("solver backend '" + backend->name() +
                              "' does not return equality-row duals");
    }
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    const auto name = backend->name();
    if (!reg.backends.emplace(name, std::move(backend)).second) {
        throw ValidationError("solver backend '" + name + "' is already registered");
    }
}

std::shared_ptr<const SolverBackend> find_backend(const std::string& name) {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    const auto it = reg.backends.find(name);
    if (it == reg.backends.end()) {
        return nullptr;
    }
    return it->second;
}

std::vector<std::string> backend_names() {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    std::vector<std::string> names;
    for (const auto& [name, backend] : reg.backends) {
        names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    return names;
}

LpSolution solve(const LpProblem& problem, const SolverOptions& options) {
    const auto backend = find_backend(options.backend);
    if (!backend) {
        throw ValidationError("unknown solver backend '" + options.backend + "'");
    }
    return backend->solve(problem, options);
}

double KktReport::relative_duality_gap() const {
    return duality_gap / (1.0 + std::abs(primal_objective));
}

KktReport check_kkt(const LpProblem& problem, const LpSolution& solution) {
    KktReport report;
    const auto n = static_cast<std::size_t>(problem.num_variables());
    const auto& eq = problem.equalities();
    const auto& ub = problem.inequalities();
    if (solution.primal.size() != n || solution.eq_duals.size() != static_cast<std::size_t>(eq.size()) ||
        solution.ub_duals.size() != static_cast<std::size_t>(ub.size())) {
        const double inf = std::numeric_limits<double>::infinity();
        report.max_primal_residual = report.max_dual_residual = report.max_cs_violation = inf;
        report.duality_gap = inf;
        return report;
    }
    const auto& x = solution.primal;
    const auto& lower = problem.lower();
    const auto& upper = problem.upper();

    // Reduced costs d = c - A_eq' y + A_ub' lambda.
    std::vector<double> d = problem.cost();
    double dual_obj = problem.objective_offset();
    for (Index i = 0; i < eq.size(); ++i) {
        double activity = 0.0;
        const double y = solution.eq_duals[static_cast<std::size_t>(i)];
        for (const auto& t : eq.row(i)) {
            activity += t.coefficient * x[static_cast<std::size_t>(t.column)];
            d[static_cast<std::size_t>(t.column)] -= t.coefficient * y;
        }
        report.max_primal_residual = std::max(report.max_primal_residual, std::abs(activity - eq.rhs(i)));
        dual_obj += eq.rhs(i) * y;
    }
    for (Index i = 0; i < ub.size(); ++i) {
        double activity = 0.0;
        const double lambda = solution.ub_duals[static_cast<std::size_t>(i)];
        for (const auto& t : ub.row(i)) {
            activity += t.coefficient * x[static_cast<std::size_t>(t.column)];
            d[static_cast<std::size_t>(t.column)] += t.coefficient * lambda;
        }
        const double slack = ub.rhs(i) - activity;
        report.max_primal_residual = std::max(report.max_primal_residual, std::max(0.0, -slack));
        report.max_dual_residual = std::max(report.max_dual_residual, std::max(0.0, -lambda));
        report.max_cs_violation = std::max(report.max_cs_violation, std::abs(lambda * slack));
        dual_obj -= ub.rhs(i) * lambda;
    }
    for (std::size_t j = 0; j < n; ++j) {
        report.max_primal_residual = std::max(report.max_primal_residual, std::max(0.0, lower[j] - x[j]));
        report.max_primal_residual = std::max(report.max_primal_residual, std::max(0.0, x[j] - upper[j]));
        if (d[j] > 0.0) {
            if (std::isfinite(lower[j])) {
                dual_obj += d[j] * lower[j];
                report.max_cs_violation = std::max(report.max_cs_violation, d[j] * std::abs(x[j] - lower[j]));
            } else {
                report.max_dual_residual = std::max(report.max_dual_residual, d[j]);
            }
        } else if (d[j] < 0.0) {
            if (std::isfinite(upper[j])) {
                dual_obj += d[j] * upper[j];
                report.max_cs_violation = std::max(report.max_cs_violation, -d[j] * std::abs(upper[j] - x[j]));
            } else {
                report.max_dual_residual = std::max(report.max_dual_residual, -d[j]);
            }
        }
    }
    report.primal_objective = problem.objective_value(x);
    report.dual_objective = dual_obj;
    report.duality_gap = std::abs(report.primal_objective - dual_obj);
    return report;
}

}  // namespace mcbtsa::lp
