#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "mcbtsa/lp/solver.hpp"

namespace mcbtsa::lp {
namespace {

std::string number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Tags like "BALANCE(3)" become "BALANCE_3".
std::string sanitize(const std::string& tag) {
    std::string out;
    out.reserve(tag.size());
    for (char ch : tag) {
        if (ch == '(' || ch == ',' || ch == '[') {
            out.push_back('_');
        } else if (ch == ')' || ch == ']' || ch == ' ') {
            continue;
        } else {
            out.push_back(ch);
        }
    }
    return out;
}

void write_terms(std::ostringstream& os, std::span<const Term> terms, const LpProblem& problem) {
    bool first = true;
    for (const auto& t : terms) {
        if (t.coefficient == 0.0) {
            continue;
        }
        const double c = t.coefficient;
        os << (c < 0.0 ? " - " : (first ? " " : " + ")) << number(std::abs(c)) << ' '
           << sanitize(problem.variable_tag(t.column));
        first = false;
    }
    if (first) {
        os << " 0 " << sanitize(problem.variable_tag(0));
    }
}

}  // namespace

std::string to_lp_format(const LpProblem& problem) {
    std::ostringstream os;
    os << "\\ objective offset " << number(problem.objective_offset()) << "\n";
    os << "Minimize\n obj:";
    std::vector<Term> obj;
    for (Index j = 0; j < problem.num_variables(); ++j) {
        obj.push_back({j, problem.cost()[static_cast<std::size_t>(j)]});
    }
    write_terms(os, obj, problem);
    os << "\nSubject To\n";
    const auto& eq = problem.equalities();
    for (Index i = 0; i < eq.size(); ++i) {
        os << ' ' << sanitize(eq.tag(i)) << ':';
        write_terms(os, eq.row(i), problem);
        os << " = " << number(eq.rhs(i)) << '\n';
    }
    const auto& ub = problem.inequalities();
    for (Index i = 0; i < ub.size(); ++i) {
        os << ' ' << sanitize(ub.tag(i)) << ':';
        write_terms(os, ub.row(i), problem);
        os << " <= " << number(ub.rhs(i)) << '\n';
    }
    os << "Bounds\n";
    for (Index j = 0; j < problem.num_variables(); ++j) {
        const double lo = problem.lower()[static_cast<std::size_t>(j)];
        const double hi = problem.upper()[static_cast<std::size_t>(j)];
        const auto name = sanitize(problem.variable_tag(j));
        if (!std::isfinite(lo) && !std::isfinite(hi)) {
            os << ' ' << name << " free\n";
        } else if (lo == hi) {
            os << ' ' << name << " = " << number(lo) << '\n';
        } else {
            os << ' ' << (std::isfinite(lo) ? number(lo) : "-inf") << " <= " << name << " <= "
               << (std::isfinite(hi) ? number(hi) : "+inf") << '\n';
        }
    }
    os << "End\n";
    return os.str();
}

}  // namespace mcbtsa::lp
