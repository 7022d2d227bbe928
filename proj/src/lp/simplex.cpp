// Two-phase bounded revised simplex.
//
// Every row gets a logical column (slack for <= rows, artificial for = rows);
// rows whose initial residual makes the slack negative get an extra
// artificial. The basis is held as a sparse LU of the last refactorization
// plus a product-form eta file.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mcbtsa/error.hpp"
#include "mcbtsa/lp/solver.hpp"

namespace mcbtsa::lp {
namespace {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;

enum class State : std::uint8_t { Basic, Lower, Upper, Zero };

struct Eta {
    int row;
    double pivot;
    std::vector<int> index;
    std::vector<double> value;
};

class BoundedSimplex {
public:
    BoundedSimplex(const LpProblem& problem, const SolverOptions& options);
    LpSolution run();

private:
    enum class Outcome { Optimal, Unbounded };

    void build_columns();
    void initial_basis();
    void refactor();
    void recompute_primal();
    void recompute_duals();
    void ftran(Vector& v) const;
    void btran(Vector& v) const;
    void column(int j, Vector& out) const;
    double dot_column(int j, const Vector& v) const;
    int price(bool bland) const;
    Outcome iterate();
    void pivot(int entering, int leave_pos, const Vector& alpha, double theta_dir, bool to_upper,
               double theta);
    void drive_out_artificials();
    bool is_fixed(int j) const { return lb_[j] == ub_[j]; }

    const LpProblem& problem_;
    SolverOptions opt_;

    int m_eq_ = 0;
    int m_ = 0;
    int n_struct_ = 0;
    int n_ = 0;

    std::vector<int> col_start_;
    std::vector<int> col_row_;
    std::vector<double> col_val_;
    std::vector<double> lb_, ub_, cost_, active_cost_, b_, x_;
    std::vector<State> state_;
    std::vector<char> artificial_;
    std::vector<int> head_;
    std::vector<int> pos_;

    mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
    std::vector<Eta> etas_;

    std::vector<double> d_;
    std::vector<double> weight_;
    double dual_tol_ = 1e-9;
    std::size_t iterations_ = 0;
    std::size_t degenerate_run_ = 0;
};

BoundedSimplex::BoundedSimplex(const LpProblem& problem, const SolverOptions& options)
    : problem_(problem), opt_(options) {
    m_eq_ = problem.equalities().size();
    m_ = m_eq_ + problem.inequalities().size();
    n_struct_ = problem.num_variables();
}

void BoundedSimplex::build_columns() {
    // Structural columns from the row-wise problem, then logicals appended later.
    std::vector<int> count(static_cast<std::size_t>(n_struct_) + 1, 0);
    const auto& eq = problem_.equalities();
    const auto& ub = problem_.inequalities();
    for (const RowBlock* block : {&eq, &ub}) {
        for (Index i = 0; i < block->size(); ++i) {
            for (const auto& t : block->row(i)) {
                if (t.coefficient != 0.0) {
                    ++count[static_cast<std::size_t>(t.column) + 1];
                }
            }
        }
    }
    col_start_.assign(count.begin(), count.end());
    for (std::size_t j = 1; j < col_start_.size(); ++j) {
        col_start_[j] += col_start_[j - 1];
    }
    col_row_.resize(static_cast<std::size_t>(col_start_.back()));
    col_val_.resize(col_row_.size());
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    int row_offset = 0;
    for (const RowBlock* block : {&eq, &ub}) {
        for (Index i = 0; i < block->size(); ++i) {
            for (const auto& t : block->row(i)) {
                if (t.coefficient == 0.0) {
                    continue;
                }
                const auto k = static_cast<std::size_t>(fill[static_cast<std::size_t>(t.column)]++);
                col_row_[k] = row_offset + i;
                col_val_[k] = t.coefficient;
            }
        }
        row_offset += block->size();
    }
    // Duplicate entries in a row for the same column are legal; they stay as
    // separate nonzeros and Eigen sums them when the basis is assembled.

    b_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_eq_; ++i) {
        b_[i] = eq.rhs(i);
    }
    for (int i = m_eq_; i < m_; ++i) {
        b_[i] = ub.rhs(i - m_eq_);
    }
    lb_ = problem_.lower();
    ub_ = problem_.upper();
    cost_ = problem_.cost();
}

void BoundedSimplex::initial_basis() {
    x_.assign(static_cast<std::size_t>(n_struct_), 0.0);
    state_.assign(static_cast<std::size_t>(n_struct_), State::Lower);
    for (int j = 0; j < n_struct_; ++j) {
        if (std::isfinite(lb_[j])) {
            x_[j] = lb_[j];
            state_[j] = State::Lower;
        } else if (std::isfinite(ub_[j])) {
            x_[j] = ub_[j];
            state_[j] = State::Upper;
        } else {
            x_[j] = 0.0;
            state_[j] = State::Zero;
        }
    }
    std::vector<double> residual = b_;
    for (int j = 0; j < n_struct_; ++j) {
        if (x_[j] == 0.0) {
            continue;
        }
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
            residual[col_row_[k]] -= col_val_[k] * x_[j];
        }
    }

    artificial_.assign(static_cast<std::size_t>(n_struct_), 0);
    head_.assign(static_cast<std::size_t>(m_), -1);
    auto append = [&](int row, double coef, double lo, double hi, bool art) {
        col_row_.push_back(row);
        col_val_.push_back(coef);
        col_start_.push_back(static_cast<int>(col_row_.size()));
        lb_.push_back(lo);
        ub_.push_back(hi);
        cost_.push_back(0.0);
        x_.push_back(0.0);
        state_.push_back(State::Lower);
        artificial_.push_back(art ? 1 : 0);
        return static_cast<int>(lb_.size()) - 1;
    };
    std::vector<std::pair<int, double>> extra;
    for (int i = 0; i < m_; ++i) {
        const double r = residual[i];
        if (i < m_eq_) {
            const int j = append(i, r >= 0.0 ? 1.0 : -1.0, 0.0, kInfinity, true);
            head_[i] = j;
            x_[j] = std::abs(r);
            state_[j] = State::Basic;
        } else {
            const int j = append(i, 1.0, 0.0, kInfinity, false);
            if (r >= 0.0) {
                head_[i] = j;
                x_[j] = r;
                state_[j] = State::Basic;
            } else {
                extra.emplace_back(i, r);
            }
        }
    }
    for (const auto& [i, r] : extra) {
        const int j = append(i, -1.0, 0.0, kInfinity, true);
        head_[i] = j;
        x_[j] = -r;
        state_[j] = State::Basic;
    }
    n_ = static_cast<int>(lb_.size());
    pos_.assign(static_cast<std::size_t>(n_), -1);
    for (int i = 0; i < m_; ++i) {
        pos_[head_[i]] = i;
    }
    weight_.assign(static_cast<std::size_t>(n_), 1.0);
}

void BoundedSimplex::column(int j, Vector& out) const {
    out.setZero(m_);
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        out[col_row_[k]] += col_val_[k];
    }
}

double BoundedSimplex::dot_column(int j, const Vector& v) const {
    double s = 0.0;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        s += col_val_[k] * v[col_row_[k]];
    }
    return s;
}

void BoundedSimplex::refactor() {
    etas_.clear();
    if (m_ == 0) {
        return;
    }
    std::vector<Eigen::Triplet<double, int>> triplets;
    triplets.reserve(static_cast<std::size_t>(m_) * 3);
    for (int i = 0; i < m_; ++i) {
        const int j = head_[i];
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
            triplets.emplace_back(col_row_[k], i, col_val_[k]);
        }
    }
    SparseMatrix basis(m_, m_);
    basis.setFromTriplets(triplets.begin(), triplets.end());
    basis.makeCompressed();
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    if (lu_.info() != Eigen::Success) {
        throw NumericalFailureError("simplex: basis factorization failed: " + lu_.lastErrorMessage());
    }
    etas_.clear();
}

void BoundedSimplex::ftran(Vector& v) const {
    if (m_ == 0) {
        return;
    }
    Vector z = lu_.solve(v);
    for (const auto& eta : etas_) {
        const double zr = z[eta.row] / eta.pivot;
        z[eta.row] = zr;
        if (zr != 0.0) {
            for (std::size_t k = 0; k < eta.index.size(); ++k) {
                z[eta.index[k]] -= eta.value[k] * zr;
            }
        }
    }
    v.swap(z);
}

void BoundedSimplex::btran(Vector& v) const {
    if (m_ == 0) {
        return;
    }
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double s = v[it->row];
        for (std::size_t k = 0; k < it->index.size(); ++k) {
            s -= it->value[k] * v[it->index[k]];
        }
        v[it->row] = s / it->pivot;
    }
    Vector z = lu_.transpose().solve(v);
    v.swap(z);
}

void BoundedSimplex::recompute_primal() {
    Vector rhs(m_);
    for (int i = 0; i < m_; ++i) {
        rhs[i] = b_[i];
    }
    for (int j = 0; j < n_; ++j) {
        if (state_[j] == State::Basic || x_[j] == 0.0) {
            continue;
        }
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
            rhs[col_row_[k]] -= col_val_[k] * x_[j];
        }
    }
    ftran(rhs);
    for (int i = 0; i < m_; ++i) {
        if (!std::isfinite(rhs[i])) {
            throw NumericalFailureError("simplex: non-finite basic solution after refactorization");
        }
        x_[head_[i]] = rhs[i];
    }
}

void BoundedSimplex::recompute_duals() {
    Vector y(m_);
    for (int i = 0; i < m_; ++i) {
        y[i] = active_cost_[head_[i]];
    }
    btran(y);
    d_.assign(static_cast<std::size_t>(n_), 0.0);
    for (int j = 0; j < n_; ++j) {
        if (state_[j] != State::Basic) {
            d_[j] = active_cost_[j] - dot_column(j, y);
        }
    }
}

int BoundedSimplex::price(bool bland) const {
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < n_; ++j) {
        const State s = state_[j];
        if (s == State::Basic || is_fixed(j)) {
            continue;
        }
        const double d = d_[j];
        bool eligible = false;
        switch (s) {
            case State::Lower:
                eligible = d < -dual_tol_;
                break;
            case State::Upper:
                eligible = d > dual_tol_;
                break;
            case State::Zero:
                eligible = std::abs(d) > dual_tol_;
                break;
            case State::Basic:
                break;
        }
        if (!eligible) {
            continue;
        }
        if (bland) {
            return j;
        }
        const double score =
            opt_.pricing == PricingRule::Devex ? d * d / weight_[j] : std::abs(d);
        if (score > best_score) {
            best_score = score;
            best = j;
        }
    }
    return best;
}

void BoundedSimplex::pivot(int q, int r, const Vector& alpha, double dir, bool to_upper, double theta) {
    const int leaving = head_[r];
    const double alpha_r = alpha[r];

    // Pivot row of the current basis inverse, for dual and devex updates.
    Vector rho = Vector::Zero(m_);
    rho[r] = 1.0;
    btran(rho);

    for (int i = 0; i < m_; ++i) {
        x_[head_[i]] -= dir * theta * alpha[i];
    }
    x_[q] += dir * theta;
    x_[leaving] = to_upper ? ub_[leaving] : lb_[leaving];
    state_[leaving] = to_upper ? State::Upper : State::Lower;
    if (!std::isfinite(x_[leaving])) {
        x_[leaving] = 0.0;
        state_[leaving] = State::Zero;
    }

    const double ratio = d_[q] / alpha_r;
    const double wq = weight_[q];
    for (int j = 0; j < n_; ++j) {
        if (state_[j] == State::Basic || j == q || j == leaving) {
            continue;
        }
        const double arj = dot_column(j, rho);
        if (arj == 0.0) {
            continue;
        }
        d_[j] -= ratio * arj;
        const double w = (arj / alpha_r) * (arj / alpha_r) * wq;
        if (w > weight_[j]) {
            weight_[j] = w;
        }
    }
    d_[leaving] = -ratio;
    d_[q] = 0.0;
    weight_[leaving] = std::max(wq / (alpha_r * alpha_r), 1.0);

    head_[r] = q;
    pos_[q] = r;
    pos_[leaving] = -1;
    state_[q] = State::Basic;

    Eta eta;
    eta.row = r;
    eta.pivot = alpha_r;
    for (int i = 0; i < m_; ++i) {
        if (i != r && alpha[i] != 0.0) {
            eta.index.push_back(i);
            eta.value.push_back(alpha[i]);
        }
    }
    etas_.push_back(std::move(eta));
}

BoundedSimplex::Outcome BoundedSimplex::iterate() {
    double cmax = 1.0;
    for (int j = 0; j < n_; ++j) {
        cmax = std::max(cmax, std::abs(active_cost_[j]));
    }
    dual_tol_ = opt_.optimality_tolerance * cmax;
    const double ftol = opt_.feasibility_tolerance;

    refactor();
    recompute_primal();
    recompute_duals();
    degenerate_run_ = 0;
    bool bland = false;
    Vector alpha(m_);

    while (true) {
        if (etas_.size() >= opt_.refactor_interval) {
            refactor();
            recompute_primal();
            recompute_duals();
        }
        int q = price(bland);
        if (q < 0) {
            if (etas_.empty()) {
                return Outcome::Optimal;
            }
            refactor();
            recompute_primal();
            recompute_duals();
            q = price(bland);
            if (q < 0) {
                return Outcome::Optimal;
            }
        }
        if (++iterations_ > opt_.max_iterations) {
            throw IterationLimitError("simplex: iteration limit of " +
                                      std::to_string(opt_.max_iterations) + " reached");
        }

        column(q, alpha);
        ftran(alpha);
        const double dir = d_[q] < 0.0 ? 1.0 : -1.0;

        // Harris two-pass ratio test (plain minimum ratio under Bland's rule).
        double theta_max = kInfinity;
        for (int i = 0; i < m_; ++i) {
            const double a = alpha[i];
            if (std::abs(a) <= opt_.pivot_tolerance) {
                continue;
            }
            const int j = head_[i];
            const double g = -dir * a;
            const double slack_tol = bland ? 0.0 : ftol;
            if (g < 0.0 && std::isfinite(lb_[j])) {
                theta_max = std::min(theta_max, (x_[j] - lb_[j] + slack_tol) / -g);
            } else if (g > 0.0 && std::isfinite(ub_[j])) {
                theta_max = std::min(theta_max, (ub_[j] - x_[j] + slack_tol) / g);
            }
        }
        const double range = ub_[q] - lb_[q];
        int r = -1;
        bool to_upper = false;
        double theta = 0.0;
        if (theta_max < kInfinity) {
            double best_pivot = 0.0;
            for (int i = 0; i < m_; ++i) {
                const double a = alpha[i];
                if (std::abs(a) <= opt_.pivot_tolerance) {
                    continue;
                }
                const int j = head_[i];
                const double g = -dir * a;
                double ratio = kInfinity;
                bool upper = false;
                if (g < 0.0 && std::isfinite(lb_[j])) {
                    ratio = (x_[j] - lb_[j]) / -g;
                } else if (g > 0.0 && std::isfinite(ub_[j])) {
                    ratio = (ub_[j] - x_[j]) / g;
                    upper = true;
                } else {
                    continue;
                }
                if (bland) {
                    if (ratio <= theta_max + 1e-12 && (r < 0 || j < head_[r])) {
                        r = i;
                        to_upper = upper;
                        theta = ratio;
                    }
                } else if (ratio <= theta_max && std::abs(a) > best_pivot) {
                    best_pivot = std::abs(a);
                    r = i;
                    to_upper = upper;
                    theta = ratio;
                }
            }
            theta = std::max(theta, 0.0);
        }
        if (std::isfinite(range) && (r < 0 || range <= theta)) {
            // Entering variable reaches its opposite bound first.
            for (int i = 0; i < m_; ++i) {
                x_[head_[i]] -= dir * range * alpha[i];
            }
            if (dir > 0.0) {
                x_[q] = ub_[q];
                state_[q] = State::Upper;
            } else {
                x_[q] = lb_[q];
                state_[q] = State::Lower;
            }
            degenerate_run_ = 0;
            bland = false;
            continue;
        }
        if (r < 0) {
            return Outcome::Unbounded;
        }
        if (theta <= 1e-12) {
            if (++degenerate_run_ > opt_.bland_after) {
                bland = true;
            }
        } else {
            degenerate_run_ = 0;
            bland = false;
        }
        pivot(q, r, alpha, dir, to_upper, theta);
    }
}

void BoundedSimplex::drive_out_artificials() {
    Vector rho(m_);
    Vector alpha(m_);
    for (int r = 0; r < m_; ++r) {
        if (!artificial_[head_[r]]) {
            continue;
        }
        rho.setZero();
        rho[r] = 1.0;
        btran(rho);
        int best = -1;
        double best_abs = 1e-7;
        for (int j = 0; j < n_; ++j) {
            if (state_[j] == State::Basic || artificial_[j]) {
                continue;
            }
            const double a = std::abs(dot_column(j, rho));
            if (a > best_abs) {
                best_abs = a;
                best = j;
            }
        }
        if (best < 0) {
            continue;  // redundant row
        }
        column(best, alpha);
        ftran(alpha);
        const int leaving = head_[r];
        d_.assign(static_cast<std::size_t>(n_), 0.0);  // recomputed for phase 2 below
        pivot(best, r, alpha, 1.0, false, 0.0);
        x_[leaving] = 0.0;
        if (etas_.size() >= opt_.refactor_interval) {
            refactor();
        }
    }
}

LpSolution BoundedSimplex::run() {
    problem_.validate();
    build_columns();
    initial_basis();

    LpSolution out;
    bool any_artificial = false;
    for (int j = 0; j < n_; ++j) {
        if (artificial_[j] && x_[j] != 0.0) {
            any_artificial = true;
        }
    }
    if (any_artificial) {
        active_cost_.assign(static_cast<std::size_t>(n_), 0.0);
        double b_scale = 1.0;
        for (double v : b_) {
            b_scale = std::max(b_scale, std::abs(v));
        }
        for (int j = 0; j < n_; ++j) {
            if (artificial_[j]) {
                active_cost_[j] = 1.0;
            }
        }
        iterate();
        double infeasibility = 0.0;
        for (int j = 0; j < n_; ++j) {
            if (artificial_[j]) {
                infeasibility += std::abs(x_[j]);
            }
        }
        if (infeasibility > opt_.feasibility_tolerance * b_scale) {
            out.status = SolveStatus::Infeasible;
            out.iterations = iterations_;
            return out;
        }
        drive_out_artificials();
    }
    for (int j = 0; j < n_; ++j) {
        if (artificial_[j]) {
            ub_[j] = 0.0;
            if (state_[j] != State::Basic) {
                x_[j] = 0.0;
                state_[j] = State::Lower;
            }
        }
    }
    active_cost_ = cost_;
    const Outcome outcome = iterate();
    out.iterations = iterations_;
    if (outcome == Outcome::Unbounded) {
        out.status = SolveStatus::Unbounded;
        return out;
    }

    // Fresh factorization for the reported point and duals.
    refactor();
    recompute_primal();
    Vector y(m_);
    for (int i = 0; i < m_; ++i) {
        y[i] = cost_[head_[i]];
    }
    btran(y);

    out.status = SolveStatus::Optimal;
    out.primal.assign(x_.begin(), x_.begin() + n_struct_);
    for (int j = 0; j < n_struct_; ++j) {
        double& v = out.primal[j];
        if (v < lb_[j] && v > lb_[j] - opt_.feasibility_tolerance) {
            v = lb_[j];
        } else if (v > ub_[j] && v < ub_[j] + opt_.feasibility_tolerance) {
            v = ub_[j];
        }
    }
    out.eq_duals.resize(static_cast<std::size_t>(m_eq_));
    for (int i = 0; i < m_eq_; ++i) {
        out.eq_duals[i] = y[i] + 0.0;
    }
    out.ub_duals.resize(static_cast<std::size_t>(m_ - m_eq_));
    for (int i = m_eq_; i < m_; ++i) {
        double v = -y[i] + 0.0;
        if (v < 0.0 && v > -dual_tol_) {
            v = 0.0;
        }
        out.ub_duals[i - m_eq_] = v;
    }
    out.objective = problem_.objective_value(out.primal);
    return out;
}

}  // namespace

LpSolution simplex_solve(const LpProblem& problem, const SolverOptions& options) {
    BoundedSimplex simplex(problem, options);
    return simplex.run();
}

}  // namespace mcbtsa::lp
