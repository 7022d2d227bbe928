#include "mcbtsa/bench/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mcbtsa/algorithm/run.hpp"
#include "mcbtsa/error.hpp"

namespace mcbtsa::bench {
namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    for (;;) {
        const auto comma = line.find(',', pos);
        cells.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (comma == std::string::npos) {
            return cells;
        }
        pos = comma + 1;
    }
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) {
        s.pop_back();
    }
    std::size_t i = 0;
    while (i < s.size() && s[i] == ' ') {
        ++i;
    }
    return s.substr(i);
}

double parse_number(const std::string& cell, std::size_t line, std::size_t column) {
    double v = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, v);
    if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
        throw IoError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": '" + cell +
                      "' is not a finite number");
    }
    return v;
}

}  // namespace

gep::TimeSeriesTable load_timeseries(std::istream& in, const gep::SystemSpec& spec) {
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("time series file is empty");
    }
    const auto header = split(trim(line));
    std::vector<std::string> expected{"step"};
    for (const auto& g : spec.generators) {
        if (g.is_vre) {
            expected.push_back("F_" + g.name);
        }
    }
    expected.push_back("D");
    const bool want_price = spec.market_participation;

    std::vector<std::string> missing;
    std::vector<std::string> unknown;
    std::vector<int> slot(header.size(), -1);  // index into expected, or -2 for price
    bool has_price = false;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto name = trim(header[c]);
        for (std::size_t d = 0; d < c; ++d) {
            if (trim(header[d]) == name) {
                throw ValidationError("time series column '" + name + "' appears twice");
            }
        }
        bool found = false;
        for (std::size_t e = 0; e < expected.size(); ++e) {
            if (expected[e] == name) {
                slot[c] = static_cast<int>(e);
                found = true;
            }
        }
        if (name == "price") {
            slot[c] = -2;
            has_price = true;
            found = true;
        }
        if (!found) {
            unknown.push_back(name);
        }
    }
    for (std::size_t e = 0; e < expected.size(); ++e) {
        if (std::find(slot.begin(), slot.end(), static_cast<int>(e)) == slot.end()) {
            missing.push_back(expected[e]);
        }
    }
    if (want_price && !has_price) {
        missing.push_back("price");
    }
    if (!missing.empty() || !unknown.empty()) {
        std::string msg = "time series schema mismatch;";
        if (!missing.empty()) {
            msg += " missing columns:";
            for (const auto& m : missing) {
                msg += " " + m;
            }
            msg += ";";
        }
        if (!unknown.empty()) {
            msg += " unknown columns:";
            for (const auto& u : unknown) {
                msg += " " + u;
            }
        }
        throw ValidationError(msg);
    }

    std::vector<std::size_t> vre_index;
    for (std::size_t g = 0; g < spec.generators.size(); ++g) {
        if (spec.generators[g].is_vre) {
            vre_index.push_back(g);
        }
    }
    gep::TimeSeriesTable ts;
    ts.capacity_factor.assign(spec.generators.size(), {});
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw IoError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                          " fields, found " + std::to_string(cells.size()));
        }
        const std::size_t t = ts.demand.size();
        double demand = 0.0;
        double price = 0.0;
        std::vector<double> f(spec.generators.size(), 1.0);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const double v = parse_number(trim(cells[c]), line_no, c + 1);
            if (slot[c] == -2) {
                price = v;
            } else if (slot[c] == 0) {
                if (v != static_cast<double>(t + 1)) {
                    throw ValidationError("line " + std::to_string(line_no) + ": step " + trim(cells[c]) +
                                          " out of sequence, expected " + std::to_string(t + 1));
                }
            } else if (static_cast<std::size_t>(slot[c]) == expected.size() - 1) {
                if (v < 0.0) {
                    throw ValidationError("line " + std::to_string(line_no) + ": negative demand");
                }
                demand = v;
            } else {
                if (v < 0.0 || v > 1.0) {
                    throw ValidationError("line " + std::to_string(line_no) + ": capacity factor " + header[c] +
                                          " = " + trim(cells[c]) + " outside [0, 1]");
                }
                f[vre_index[static_cast<std::size_t>(slot[c]) - 1]] = v;
            }
        }
        for (std::size_t g = 0; g < spec.generators.size(); ++g) {
            ts.capacity_factor[g].push_back(f[g]);
        }
        ts.demand.push_back(demand);
        ts.price.push_back(price);
    }
    if (ts.horizon() == 0) {
        throw ValidationError("time series has no rows");
    }
    ts.validate(spec);
    return ts;
}

gep::TimeSeriesTable load_timeseries(const std::filesystem::path& path, const gep::SystemSpec& spec) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return load_timeseries(in, spec);
}

void write_timeseries(std::ostream& out, const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts) {
    using algorithm::format_fixed;
    out << "step";
    for (const auto& g : spec.generators) {
        if (g.is_vre) {
            out << ",F_" << g.name;
        }
    }
    out << ",D,price\n";
    for (std::size_t t = 0; t < ts.horizon(); ++t) {
        out << t + 1;
        for (std::size_t g = 0; g < spec.generators.size(); ++g) {
            if (spec.generators[g].is_vre) {
                out << ',' << format_fixed(ts.capacity_factor[g][t]);
            }
        }
        out << ',' << format_fixed(ts.demand[t]) << ',' << format_fixed(ts.price[t]) << '\n';
    }
}

void write_timeseries(const std::filesystem::path& path, const gep::SystemSpec& spec,
                      const gep::TimeSeriesTable& ts) {
    std::ostringstream ss;
    write_timeseries(ss, spec, ts);
    write_text(path, ss.str());
}

nlohmann::json system_to_json(const gep::SystemSpec& spec) {
    nlohmann::json gens = nlohmann::json::array();
    for (const auto& g : spec.generators) {
        gens.push_back({{"name", g.name}, {"c_op", g.c_op}, {"c_inv", g.c_inv}, {"is_vre", g.is_vre}});
    }
    nlohmann::json stos = nlohmann::json::array();
    for (const auto& s : spec.storages) {
        stos.push_back({{"name", s.name},
                        {"eta_c", s.eta_c},
                        {"eta_d", s.eta_d},
                        {"e_max", s.e_max},
                        {"e_min", s.e_min},
                        {"p_c_max", s.p_c_max},
                        {"p_d_max", s.p_d_max},
                        {"c_d", s.c_d}});
    }
    return {{"generators", gens},
            {"storages", stos},
            {"c_ns", spec.c_ns},
            {"budget", spec.budget},
            {"delta", spec.delta},
            {"market_participation", spec.market_participation}};
}

gep::SystemSpec system_from_json(const nlohmann::json& doc) {
    gep::SystemSpec spec;
    try {
        for (const auto& g : doc.at("generators")) {
            spec.generators.push_back({g.at("name").get<std::string>(), g.at("c_op").get<double>(),
                                       g.at("c_inv").get<double>(), g.value("is_vre", false)});
        }
        for (const auto& s : doc.value("storages", nlohmann::json::array())) {
            gep::StorageSpec st;
            st.name = s.at("name").get<std::string>();
            st.eta_c = s.at("eta_c").get<double>();
            st.eta_d = s.at("eta_d").get<double>();
            st.e_max = s.at("e_max").get<double>();
            st.e_min = s.value("e_min", 0.0);
            st.p_c_max = s.at("p_c_max").get<double>();
            st.p_d_max = s.at("p_d_max").get<double>();
            st.c_d = s.value("c_d", 0.0);
            spec.storages.push_back(st);
        }
        spec.c_ns = doc.at("c_ns").get<double>();
        spec.budget = doc.at("budget").get<double>();
        spec.delta = doc.value("delta", 1.0);
        spec.market_participation = doc.value("market_participation", false);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("system description: ") + e.what());
    }
    spec.validate();
    return spec;
}

namespace {

void dump_into(std::string& out, const nlohmann::json& j, int indent, int depth) {
    const auto pad = [&](int d) {
        if (indent >= 0) {
            out += '\n';
            out.append(static_cast<std::size_t>(indent * d), ' ');
        }
    };
    const char* colon = indent >= 0 ? ": " : ":";
    if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) {
                out += ',';
            }
            first = false;
            pad(depth + 1);
            out += nlohmann::json(it.key()).dump();
            out += colon;
            dump_into(out, it.value(), indent, depth + 1);
        }
        pad(depth);
        out += '}';
    } else if (j.is_array()) {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            pad(depth + 1);
            dump_into(out, j[i], indent, depth + 1);
        }
        pad(depth);
        out += ']';
    } else if (j.is_number_float()) {
        const double v = j.get<double>();
        out += std::isfinite(v) ? algorithm::format_fixed(v) : "null";
    } else {
        out += j.dump();
    }
}

}  // namespace

std::string dump_json(const nlohmann::json& doc, int indent) {
    std::string out;
    dump_into(out, doc, indent, 0);
    return out;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

gep::SystemSpec load_system(const std::filesystem::path& path) { return system_from_json(read_json(path)); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

gep::SystemSpec scale_investment(const gep::SystemSpec& spec, std::size_t horizon, double reference_hours) {
    const double factor = spec.delta * static_cast<double>(horizon) / reference_hours;
    gep::SystemSpec out = spec;
    for (auto& g : out.generators) {
        g.c_inv *= factor;
    }
    out.budget *= factor;
    return out;
}

gep::SystemSpec default_system(const std::string& vre, double energy_to_power_hours) {
    if (vre != "pv" && vre != "wind") {
        throw ValidationError("renewable technology must be pv or wind");
    }
    gep::SystemSpec spec;
    spec.generators = {{"thermal", 130.0, 1e5, false}, {vre, vre == "wind" ? 2.5 : 1.0, 8e4, true}};
    gep::StorageSpec st;
    st.name = "storage";
    st.eta_c = 0.9;
    st.eta_d = 0.9;
    st.p_c_max = 200.0;
    st.p_d_max = 200.0;
    st.e_min = 0.0;
    st.e_max = energy_to_power_hours * st.p_d_max;
    st.c_d = 1.5;
    spec.storages = {st};
    spec.c_ns = 5e3;
    spec.budget = 3e8;
    spec.delta = 1.0;
    return spec;
}

}  // namespace mcbtsa::bench
