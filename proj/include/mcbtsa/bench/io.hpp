#pragma once

#include <filesystem>
#include <iosfwd>

#include "json.hpp"
#include "mcbtsa/gep/types.hpp"

namespace mcbtsa::bench {

/// Reads `step,F_<vre>...,D[,price]`. One F column per VRE generator; price
/// may be omitted when the market is off (then 0). Parse errors raise IoError
/// naming line and column; schema and range violations raise ValidationError.
gep::TimeSeriesTable load_timeseries(std::istream& in, const gep::SystemSpec& spec);
gep::TimeSeriesTable load_timeseries(const std::filesystem::path& path, const gep::SystemSpec& spec);

/// Same schema, numbers in shortest round-trip fixed notation.
void write_timeseries(std::ostream& out, const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts);
void write_timeseries(const std::filesystem::path& path, const gep::SystemSpec& spec,
                      const gep::TimeSeriesTable& ts);

nlohmann::json system_to_json(const gep::SystemSpec& spec);
/// Validates the result.
gep::SystemSpec system_from_json(const nlohmann::json& doc);
gep::SystemSpec load_system(const std::filesystem::path& path);

/// Like json::dump, but floating-point values use shortest round-trip fixed notation.
std::string dump_json(const nlohmann::json& doc, int indent = 2);

nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Multiplies investment costs and the budget by delta * T / reference_hours.
gep::SystemSpec scale_investment(const gep::SystemSpec& spec, std::size_t horizon, double reference_hours = 8736.0);

/// The reference system: thermal plus one VRE unit ("pv" or "wind") and one
/// storage unit with the given energy-to-power ratio.
gep::SystemSpec default_system(const std::string& vre = "pv", double energy_to_power_hours = 4.0);

}  // namespace mcbtsa::bench
