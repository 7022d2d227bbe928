#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mcbtsa::lp {

using Index = std::int32_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Term {
    Index column;
    double coefficient;
};

/// A block of linear rows stored row-wise, each row carrying a tag.
class RowBlock {
public:
    Index add_row(std::string tag, std::span<const Term> terms, double rhs);

    Index size() const { return static_cast<Index>(rhs_.size()); }
    std::span<const Term> row(Index i) const;
    double rhs(Index i) const { return rhs_[static_cast<std::size_t>(i)]; }
    void set_rhs(Index i, double value) { rhs_[static_cast<std::size_t>(i)] = value; }
    const std::vector<double>& rhs() const { return rhs_; }
    const std::string& tag(Index i) const { return tags_[static_cast<std::size_t>(i)]; }
    std::optional<Index> find(std::string_view tag) const;
    std::size_t nonzeros() const { return terms_.size(); }

private:
    std::vector<std::size_t> starts_{0};
    std::vector<Term> terms_;
    std::vector<double> rhs_;
    std::vector<std::string> tags_;
    std::unordered_map<std::string, Index> index_;
};

/// min c'x + offset  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  l <= x <= u.
///
/// Row tags are unique across both blocks. Variables default to [0, +inf).
class LpProblem {
public:
    Index add_variable(std::string tag, double cost, double lower = 0.0, double upper = kInfinity);
    Index add_equality(std::string tag, std::span<const Term> terms, double rhs);
    Index add_inequality(std::string tag, std::span<const Term> terms, double rhs);
    Index add_equality(std::string tag, std::initializer_list<Term> terms, double rhs) {
        return add_equality(std::move(tag), std::span<const Term>(terms.begin(), terms.size()), rhs);
    }
    Index add_inequality(std::string tag, std::initializer_list<Term> terms, double rhs) {
        return add_inequality(std::move(tag), std::span<const Term>(terms.begin(), terms.size()), rhs);
    }

    Index num_variables() const { return static_cast<Index>(cost_.size()); }
    const std::vector<double>& cost() const { return cost_; }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    const std::string& variable_tag(Index j) const { return var_tags_[static_cast<std::size_t>(j)]; }
    void set_cost(Index j, double value) { cost_[static_cast<std::size_t>(j)] = value; }
    void set_bounds(Index j, double lower, double upper);

    const RowBlock& equalities() const { return eq_; }
    const RowBlock& inequalities() const { return ub_; }
    RowBlock& equalities() { return eq_; }
    RowBlock& inequalities() { return ub_; }

    double objective_offset() const { return offset_; }
    void set_objective_offset(double value) { offset_ = value; }

    /// Throws ValidationError when dimensions, bounds or right-hand sides are inconsistent.
    void validate() const;

    /// c'x + offset.
    double objective_value(std::span<const double> x) const;

private:
    void claim_tag(const std::string& tag);

    std::vector<double> cost_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<std::string> var_tags_;
    RowBlock eq_;
    RowBlock ub_;
    double offset_ = 0.0;
    std::unordered_map<std::string, char> row_tags_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };

const char* to_string(SolveStatus status);

struct LpSolution {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<double> primal;
    /// d(objective)/d(b_eq[i]).
    std::vector<double> eq_duals;
    /// Nonnegative multipliers of the <= rows; raising b_ub[i] lowers the objective by ub_duals[i].
    std::vector<double> ub_duals;
    /// Includes the constant offset.
    double objective = 0.0;
    std::size_t iterations = 0;
};

}  // namespace mcbtsa::lp
