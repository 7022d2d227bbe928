#include "mcbtsa/gep/types.hpp"

#include <cmath>
#include <set>

#include "mcbtsa/error.hpp"

namespace mcbtsa::gep {
namespace {

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw ValidationError(message);
    }
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void SystemSpec::validate() const {
    require(finite(delta) && delta > 0.0, "system: delta must be positive");
    require(finite(budget) && budget >= 0.0, "system: budget must be nonnegative");
    require(finite(c_ns) && c_ns > 0.0, "system: c_ns must be positive");
    require(!generators.empty(), "system: at least one generator is required");
    std::set<std::string> names;
    for (const auto& g : generators) {
        require(!g.name.empty(), "system: generator without a name");
        require(names.insert(g.name).second, "system: duplicate generator name '" + g.name + "'");
        require(finite(g.c_op) && g.c_op >= 0.0, "generator " + g.name + ": c_op must be nonnegative");
        require(finite(g.c_inv) && g.c_inv >= 0.0, "generator " + g.name + ": c_inv must be nonnegative");
    }
    for (const auto& s : storages) {
        const std::string who = "storage " + s.name + ": ";
        require(names.insert(s.name).second, "system: duplicate unit name '" + s.name + "'");
        require(s.eta_c > 0.0 && s.eta_c <= 1.0, who + "eta_c must lie in (0, 1]");
        require(s.eta_d > 0.0 && s.eta_d <= 1.0, who + "eta_d must lie in (0, 1]");
        require(finite(s.e_min) && finite(s.e_max) && s.e_min >= 0.0 && s.e_min <= s.e_max,
                who + "need 0 <= e_min <= e_max");
        require(finite(s.p_c_max) && s.p_c_max >= 0.0, who + "p_c_max must be nonnegative");
        require(finite(s.p_d_max) && s.p_d_max >= 0.0, who + "p_d_max must be nonnegative");
        require(finite(s.c_d) && s.c_d >= 0.0, who + "c_d must be nonnegative");
    }
}

std::size_t SystemSpec::generator_index(const std::string& name) const {
    for (std::size_t g = 0; g < generators.size(); ++g) {
        if (generators[g].name == name) {
            return g;
        }
    }
    throw ValidationError("unknown generator '" + name + "'");
}

void TimeSeriesTable::validate(const SystemSpec& spec) const {
    const auto T = horizon();
    require(T >= 1, "time series: empty horizon");
    require(capacity_factor.size() == spec.generators.size(),
            "time series: one capacity-factor series per generator is required");
    require(price.size() == T, "time series: price length differs from demand length");
    for (std::size_t g = 0; g < capacity_factor.size(); ++g) {
        const auto& f = capacity_factor[g];
        require(f.size() == T, "time series: capacity factors of " + spec.generators[g].name +
                                   " have the wrong length");
        for (std::size_t t = 0; t < T; ++t) {
            require(finite(f[t]) && f[t] >= 0.0 && f[t] <= 1.0,
                    "time series: capacity factor of " + spec.generators[g].name + " at step " +
                        std::to_string(t + 1) + " outside [0, 1]");
        }
    }
    for (std::size_t t = 0; t < T; ++t) {
        require(finite(demand[t]) && demand[t] >= 0.0,
                "time series: demand at step " + std::to_string(t + 1) + " is negative or non-finite");
        require(finite(price[t]), "time series: price at step " + std::to_string(t + 1) + " is non-finite");
        if (spec.market_participation) {
            require(price[t] < spec.c_ns, "time series: price at step " + std::to_string(t + 1) +
                                              " is not below c_ns; selling would be unbounded");
        }
    }
}

std::vector<double> Aggregation::weights() const {
    std::vector<double> w;
    w.reserve(groups.size());
    for (const auto& g : groups) {
        w.push_back(static_cast<double>(g.size()));
    }
    return w;
}

Aggregation Aggregation::identity(std::size_t horizon) {
    Aggregation agg;
    agg.groups.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        agg.groups.push_back({t});
    }
    agg.is_protected.assign(horizon, false);
    return agg;
}

Aggregation Aggregation::from_block_lengths(const std::vector<std::size_t>& lengths) {
    Aggregation agg;
    std::size_t t = 0;
    for (auto len : lengths) {
        std::vector<std::size_t> g(len);
        for (auto& v : g) {
            v = t++;
        }
        agg.groups.push_back(std::move(g));
    }
    agg.is_protected.assign(agg.groups.size(), false);
    return agg;
}

void Aggregation::validate(std::size_t horizon) const {
    auto fail = [](const std::string& m) { throw InvalidAggregationError("aggregation: " + m); };
    if (groups.empty()) {
        fail("no groups");
    }
    if (is_protected.size() != groups.size()) {
        fail("protected flags do not match the group count");
    }
    if (representation == Representation::Medoid && medoids.size() != groups.size()) {
        fail("one medoid per group is required");
    }
    std::vector<char> seen(horizon, 0);
    std::size_t total = 0;
    for (std::size_t r = 0; r < groups.size(); ++r) {
        const auto& g = groups[r];
        if (g.empty()) {
            fail("group " + std::to_string(r + 1) + " is empty");
        }
        if (is_protected[r] && g.size() != 1) {
            fail("protected group " + std::to_string(r + 1) + " is not a singleton");
        }
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (g[k] >= horizon) {
                fail("step " + std::to_string(g[k] + 1) + " outside the horizon");
            }
            if (seen[g[k]]++) {
                fail("step " + std::to_string(g[k] + 1) + " appears twice");
            }
            if (representation == Representation::Mean && k > 0 && g[k] != g[k - 1] + 1) {
                fail("group " + std::to_string(r + 1) + " is not a run of consecutive steps");
            }
        }
        if (representation == Representation::Medoid) {
            bool member = false;
            for (auto t : g) {
                member = member || t == medoids[r];
            }
            if (!member) {
                fail("medoid of group " + std::to_string(r + 1) + " is not a member");
            }
        }
        total += g.size();
    }
    if (total != horizon) {
        fail("groups cover " + std::to_string(total) + " of " + std::to_string(horizon) + " steps");
    }
}

}  // namespace mcbtsa::gep
