#include "mcbtsa/lp/problem.hpp"

#include <cmath>

#include "mcbtsa/error.hpp"

namespace mcbtsa::lp {

Index RowBlock::add_row(std::string tag, std::span<const Term> terms, double rhs) {
    const auto id = size();
    terms_.insert(terms_.end(), terms.begin(), terms.end());
    starts_.push_back(terms_.size());
    rhs_.push_back(rhs);
    index_.emplace(tag, id);
    tags_.push_back(std::move(tag));
    return id;
}

std::span<const Term> RowBlock::row(Index i) const {
    const auto k = static_cast<std::size_t>(i);
    return {terms_.data() + starts_[k], starts_[k + 1] - starts_[k]};
}

std::optional<Index> RowBlock::find(std::string_view tag) const {
    const auto it = index_.find(std::string(tag));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

Index LpProblem::add_variable(std::string tag, double cost, double lower, double upper) {
    cost_.push_back(cost);
    lower_.push_back(lower);
    upper_.push_back(upper);
    var_tags_.push_back(std::move(tag));
    return num_variables() - 1;
}

void LpProblem::claim_tag(const std::string& tag) {
    if (!row_tags_.emplace(tag, 0).second) {
        throw ValidationError("duplicate row tag '" + tag + "'");
    }
}

Index LpProblem::add_equality(std::string tag, std::span<const Term> terms, double rhs) {
    claim_tag(tag);
    return eq_.add_row(std::move(tag), terms, rhs);
}

Index LpProblem::add_inequality(std::string tag, std::span<const Term> terms, double rhs) {
    claim_tag(tag);
    return ub_.add_row(std::move(tag), terms, rhs);
}

void LpProblem::set_bounds(Index j, double lower, double upper) {
    lower_[static_cast<std::size_t>(j)] = lower;
    upper_[static_cast<std::size_t>(j)] = upper;
}

void LpProblem::validate() const {
    const auto n = num_variables();
    for (Index j = 0; j < n; ++j) {
        const double l = lower_[static_cast<std::size_t>(j)];
        const double u = upper_[static_cast<std::size_t>(j)];
        if (std::isnan(l) || std::isnan(u) || l > u || l == kInfinity || u == -kInfinity) {
            throw ValidationError("invalid bounds on variable '" + variable_tag(j) + "'");
        }
        if (!std::isfinite(cost_[static_cast<std::size_t>(j)])) {
            throw ValidationError("non-finite cost on variable '" + variable_tag(j) + "'");
        }
    }
    for (const RowBlock* block : {&eq_, &ub_}) {
        for (Index i = 0; i < block->size(); ++i) {
            if (!std::isfinite(block->rhs(i))) {
                throw ValidationError("non-finite right-hand side on row '" + block->tag(i) + "'");
            }
            for (const auto& term : block->row(i)) {
                if (term.column < 0 || term.column >= n || !std::isfinite(term.coefficient)) {
                    throw ValidationError("bad coefficient on row '" + block->tag(i) + "'");
                }
            }
        }
    }
    if (!std::isfinite(offset_)) {
        throw ValidationError("non-finite objective offset");
    }
}

double LpProblem::objective_value(std::span<const double> x) const {
    double value = offset_;
    for (std::size_t j = 0; j < cost_.size(); ++j) {
        value += cost_[j] * x[j];
    }
    return value;
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal:
            return "optimal";
        case SolveStatus::Infeasible:
            return "infeasible";
        case SolveStatus::Unbounded:
            return "unbounded";
    }
    return "unknown";
}

}  // namespace mcbtsa::lp
