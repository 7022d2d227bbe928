#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcbtsa/gep/types.hpp"

namespace mcbtsa::bench {

enum class VreShape { Solar, Wind };

/// Parameters of the synthetic year. All profiles are hourly closed forms
/// plus seeded noise; see generate_synthetic.
struct SyntheticProfile {
    double demand_mean = 1000.0;       ///< MWh per step
    double demand_daily = 0.12;        ///< relative amplitude of the daily cycle
    double demand_weekend_drop = 0.08; ///< relative drop on days 6 and 7 of each week
    double demand_seasonal = 0.10;     ///< relative winter excess
    double demand_noise = 0.02;        ///< std of the AR(1) relative noise
    double solar_peak = 0.95;
    double wind_persistence = 0.97;    ///< AR(1) coefficient of the wind latent
    double price_base = 70.0;          ///< money/MWh at average net load
    double price_slope = 80.0;         ///< money/MWh per unit of relative net load
    double price_noise = 5.0;
    std::size_t start_day = 0;         ///< day of year of step 0
};

/// "pv"/"solar" in the name selects Solar, anything else Wind.
VreShape shape_for(const std::string& generator_name);

/// Deterministic synthetic inputs for every generator in `spec`.
///
/// hour h = t mod 24, day d = start_day + t / 24:
///   solar  F = peak * max(0, sin(pi (h - 6) / 12)) * (0.75 + 0.25 cos(2 pi (d - 172) / 365)) * cloud_d
///   wind   F = 1 / (1 + exp(-(1.6 w_t - 0.9))) with w_t a unit-variance AR(1)
///   demand D = mean * (1 + daily(h) - weekend(d) + seasonal cos(2 pi d / 365) + noise_t)
///   price  = base + slope * (net_t / mean - 0.7) + noise, clipped to [0, c_ns / 2]
/// where net_t is demand minus renewable output at half a demand_mean of capacity
/// per VRE unit. Non-VRE generators get the constant factor 1.
gep::TimeSeriesTable generate_synthetic(const gep::SystemSpec& spec, const SyntheticProfile& profile,
                                        std::size_t horizon, std::uint64_t seed);

}  // namespace mcbtsa::bench
