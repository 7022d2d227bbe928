#include "mcbtsa/bench/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>

namespace mcbtsa::bench {

VreShape shape_for(const std::string& generator_name) {
    std::string lower = generator_name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower.find("pv") != std::string::npos || lower.find("solar") != std::string::npos) {
        return VreShape::Solar;
    }
    return VreShape::Wind;
}

gep::TimeSeriesTable generate_synthetic(const gep::SystemSpec& spec, const SyntheticProfile& profile,
                                        std::size_t horizon, std::uint64_t seed) {
    constexpr double pi = std::numbers::pi;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const std::size_t days = (horizon + 23) / 24;
    gep::TimeSeriesTable ts;
    ts.capacity_factor.assign(spec.generators.size(), std::vector<double>(horizon, 1.0));
    ts.demand.assign(horizon, 0.0);
    ts.price.assign(horizon, 0.0);

    std::vector<double> renewable(horizon, 0.0);
    for (std::size_t g = 0; g < spec.generators.size(); ++g) {
        if (!spec.generators[g].is_vre) {
            continue;
        }
        auto& f = ts.capacity_factor[g];
        if (shape_for(spec.generators[g].name) == VreShape::Solar) {
            std::vector<double> cloud(days);
            double z = 0.0;
            for (auto& c : cloud) {
                z = 0.6 * z + 0.8 * normal(rng);
                c = std::clamp(0.7 + 0.3 * z, 0.15, 1.0);
            }
            for (std::size_t t = 0; t < horizon; ++t) {
                const double h = static_cast<double>(t % 24);
                const double d = static_cast<double>(profile.start_day + t / 24);
                const double clear = std::max(0.0, std::sin(pi * (h - 6.0) / 12.0));
                const double season = 0.75 + 0.25 * std::cos(2.0 * pi * (d - 172.0) / 365.0);
                f[t] = std::clamp(profile.solar_peak * clear * season * cloud[t / 24], 0.0, 1.0);
            }
        } else {
            const double phi = profile.wind_persistence;
            const double innovation = std::sqrt(1.0 - phi * phi);
            double w = normal(rng);
            for (std::size_t t = 0; t < horizon; ++t) {
                w = phi * w + innovation * normal(rng);
                f[t] = 1.0 / (1.0 + std::exp(-(1.6 * w - 0.9)));
            }
        }
        for (std::size_t t = 0; t < horizon; ++t) {
            renewable[t] += f[t] * profile.demand_mean;
        }
    }

    double noise = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        const double h = static_cast<double>(t % 24);
        const std::size_t day = profile.start_day + t / 24;
        const double daily = profile.demand_daily *
                             (std::sin(2.0 * pi * (h - 6.0) / 24.0) - 0.4 * std::cos(4.0 * pi * h / 24.0));
        const double weekend = (day % 7 >= 5) ? profile.demand_weekend_drop : 0.0;
        const double seasonal = profile.demand_seasonal * std::cos(2.0 * pi * static_cast<double>(day) / 365.0);
        noise = 0.8 * noise + 0.6 * profile.demand_noise * normal(rng);
        ts.demand[t] = std::max(0.0, profile.demand_mean * (1.0 + daily - weekend + seasonal + noise));
    }
    for (std::size_t t = 0; t < horizon; ++t) {
        const double net = (ts.demand[t] - 0.5 * renewable[t]) / profile.demand_mean;
        const double p = profile.price_base + profile.price_slope * (net - 0.7) + profile.price_noise * normal(rng);
        ts.price[t] = std::clamp(p, 0.0, 0.5 * spec.c_ns);
    }
    return ts;
}

}  // namespace mcbtsa::bench
