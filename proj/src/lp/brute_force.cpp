// Vertex enumeration oracle. Independent of the simplex code path: works on
// dense matrices, enumerates every candidate active set explicitly.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "mcbtsa/error.hpp"
#include "mcbtsa/lp/solver.hpp"

namespace mcbtsa::lp {
namespace {

using Matrix = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// g'x <= h, remembering where it came from.
struct Halfspace {
    Vec g;
    double h;
    int ub_row;  // -1 for bound constraints
};

struct DenseForm {
    int n = 0;                  // columns after splitting free variables
    std::vector<int> original;  // original variable per column
    std::vector<double> sign;   // +1 or -1 (negative part of a free variable)
    Vec c;
    Matrix a_eq;
    Vec b_eq;
    std::vector<Halfspace> halfspaces;
};

DenseForm densify(const LpProblem& problem) {
    DenseForm f;
    const int n0 = problem.num_variables();
    std::vector<int> first(static_cast<std::size_t>(n0));
    for (int j = 0; j < n0; ++j) {
        first[j] = f.n;
        f.original.push_back(j);
        f.sign.push_back(1.0);
        ++f.n;
        if (!std::isfinite(problem.lower()[j]) && !std::isfinite(problem.upper()[j])) {
            f.original.push_back(j);
            f.sign.push_back(-1.0);
            ++f.n;
        }
    }
    auto expand = [&](std::span<const Term> terms) {
        Vec row = Vec::Zero(f.n);
        for (const auto& t : terms) {
            for (int k = first[t.column]; k < f.n && f.original[k] == t.column; ++k) {
                row[k] += f.sign[k] * t.coefficient;
            }
        }
        return row;
    };
    f.c = Vec::Zero(f.n);
    for (int k = 0; k < f.n; ++k) {
        f.c[k] = f.sign[k] * problem.cost()[f.original[k]];
    }
    const auto& eq = problem.equalities();
    f.a_eq = Matrix::Zero(eq.size(), f.n);
    f.b_eq = Vec::Zero(eq.size());
    for (Index i = 0; i < eq.size(); ++i) {
        f.a_eq.row(i) = expand(eq.row(i)).transpose();
        f.b_eq[i] = eq.rhs(i);
    }
    const auto& ub = problem.inequalities();
    for (Index i = 0; i < ub.size(); ++i) {
        f.halfspaces.push_back({expand(ub.row(i)), ub.rhs(i), i});
    }
    for (int k = 0; k < f.n; ++k) {
        const int j = f.original[k];
        const double lo = problem.lower()[j];
        const double hi = problem.upper()[j];
        Vec e = Vec::Zero(f.n);
        e[k] = 1.0;
        if (f.sign[k] < 0.0 || (!std::isfinite(lo) && !std::isfinite(hi))) {
            f.halfspaces.push_back({-e, 0.0, -1});  // split parts are >= 0
            continue;
        }
        if (std::isfinite(lo)) {
            f.halfspaces.push_back({-e, -lo, -1});
        }
        if (std::isfinite(hi)) {
            f.halfspaces.push_back({e, hi, -1});
        }
    }
    return f;
}

/// Calls visit(subset) for every k-subset of {0..n-1}; stops when visit returns true.
bool for_each_subset(int n, int k, const std::function<bool(const std::vector<int>&)>& visit) {
    if (k < 0 || k > n) {
        return false;
    }
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        idx[i] = i;
    }
    while (true) {
        if (visit(idx)) {
            return true;
        }
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) {
            --i;
        }
        if (i < 0) {
            return false;
        }
        ++idx[i];
        for (int t = i + 1; t < k; ++t) {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

}  // namespace

LpSolution brute_force_solve(const LpProblem& problem, int max_variables) {
    problem.validate();
    if (problem.num_variables() > max_variables) {
        throw ValidationError("brute_force_solve: " + std::to_string(problem.num_variables()) +
                              " variables exceeds the limit of " + std::to_string(max_variables));
    }
    const DenseForm f = densify(problem);
    const int n = f.n;
    const double tol = 1e-9;

    // Independent subset of equality rows.
    std::vector<int> eq_rows;
    {
        Matrix acc(0, n);
        for (int i = 0; i < f.a_eq.rows(); ++i) {
            Matrix trial(acc.rows() + 1, n);
            trial << acc, f.a_eq.row(i);
            Eigen::FullPivLU<Matrix> lu(trial);
            lu.setThreshold(1e-10);
            if (lu.rank() == trial.rows()) {
                acc = trial;
                eq_rows.push_back(i);
            }
        }
    }
    const int r_eq = static_cast<int>(eq_rows.size());
    const int k = n - r_eq;
    const int h = static_cast<int>(f.halfspaces.size());
    if (binomial(h, k) > 5e6) {
        throw ValidationError("brute_force_solve: too many candidate vertices");
    }

    auto stacked = [&](const std::vector<int>& subset) {
        Matrix m(n, n);
        Vec rhs(n);
        int row = 0;
        for (int i : eq_rows) {
            m.row(row) = f.a_eq.row(i);
            rhs[row++] = f.b_eq[i];
        }
        for (int s : subset) {
            m.row(row) = f.halfspaces[s].g.transpose();
            rhs[row++] = f.halfspaces[s].h;
        }
        return std::pair{m, rhs};
    };
    auto feasible = [&](const Vec& x) {
        for (int i = 0; i < f.a_eq.rows(); ++i) {
            if (std::abs(f.a_eq.row(i).dot(x) - f.b_eq[i]) > tol * (1.0 + std::abs(f.b_eq[i]))) {
                return false;
            }
        }
        for (const auto& hs : f.halfspaces) {
            if (hs.g.dot(x) - hs.h > tol * (1.0 + std::abs(hs.h))) {
                return false;
            }
        }
        return true;
    };

    LpSolution out;
    bool found = false;
    Vec best;
    double best_obj = 0.0;
    for_each_subset(h, k, [&](const std::vector<int>& subset) {
        auto [m, rhs] = stacked(subset);
        Eigen::FullPivLU<Matrix> lu(m);
        lu.setThreshold(1e-10);
        if (!lu.isInvertible()) {
            return false;
        }
        const Vec x = lu.solve(rhs);
        if (!feasible(x)) {
            return false;
        }
        const double obj = f.c.dot(x);
        if (!found || obj < best_obj - 1e-12 * (1.0 + std::abs(best_obj))) {
            found = true;
            best = x;
            best_obj = obj;
        }
        return false;
    });
    if (!found) {
        out.status = SolveStatus::Infeasible;
        return out;
    }

    // Improving extreme ray of the recession cone {A_eq d = 0, g'd <= 0}.
    const bool unbounded = k >= 1 && for_each_subset(h, k - 1, [&](const std::vector<int>& subset) {
        Matrix m(n - 1, n);
        int row = 0;
        for (int i : eq_rows) {
            m.row(row++) = f.a_eq.row(i);
        }
        for (int s : subset) {
            m.row(row++) = f.halfspaces[s].g.transpose();
        }
        Eigen::FullPivLU<Matrix> lu(m);
        lu.setThreshold(1e-10);
        if (lu.rank() != n - 1) {
            return false;
        }
        const Matrix kernel = lu.kernel();
        if (kernel.cols() != 1) {
            return false;
        }
        for (double sgn : {1.0, -1.0}) {
            const Vec d = sgn * kernel.col(0).normalized();
            if (f.c.dot(d) >= -1e-9) {
                continue;
            }
            bool in_cone = true;
            for (const auto& hs : f.halfspaces) {
                if (hs.g.dot(d) > 1e-10) {
                    in_cone = false;
                    break;
                }
            }
            if (in_cone) {
                return true;
            }
        }
        return false;
    });
    if (unbounded) {
        out.status = SolveStatus::Unbounded;
        return out;
    }

    out.status = SolveStatus::Optimal;
    out.primal.assign(static_cast<std::size_t>(problem.num_variables()), 0.0);
    for (int col = 0; col < n; ++col) {
        out.primal[f.original[col]] += f.sign[col] * best[col];
    }
    out.objective = problem.objective_value(out.primal);

    // Duals from an optimal basis: c = A_eq' y - G_S' lambda with lambda >= 0.
    std::vector<int> active;
    for (int s = 0; s < h; ++s) {
        const auto& hs = f.halfspaces[s];
        if (std::abs(hs.g.dot(best) - hs.h) <= 1e-8 * (1.0 + std::abs(hs.h))) {
            active.push_back(s);
        }
    }
    out.eq_duals.assign(static_cast<std::size_t>(problem.equalities().size()), 0.0);
    out.ub_duals.assign(static_cast<std::size_t>(problem.inequalities().size()), 0.0);
    for_each_subset(static_cast<int>(active.size()), k, [&](const std::vector<int>& pick) {
        Matrix m(n, n);
        int col = 0;
        for (int i : eq_rows) {
            m.col(col++) = f.a_eq.row(i).transpose();
        }
        for (int p : pick) {
            m.col(col++) = -f.halfspaces[active[p]].g;
        }
        Eigen::FullPivLU<Matrix> lu(m);
        lu.setThreshold(1e-10);
        if (!lu.isInvertible()) {
            return false;
        }
        const Vec mult = lu.solve(f.c);
        for (int p = 0; p < k; ++p) {
            if (mult[r_eq + p] < -1e-9) {
                return false;
            }
        }
        for (int i = 0; i < r_eq; ++i) {
            out.eq_duals[eq_rows[i]] = mult[i];
        }
        for (int p = 0; p < k; ++p) {
            const int row = f.halfspaces[active[pick[p]]].ub_row;
            if (row >= 0) {
                out.ub_duals[row] = std::max(mult[r_eq + p], 0.0);
            }
        }
        return true;
    });
    return out;
}

}  // namespace mcbtsa::lp
