#include "mcbtsa/ml/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mcbtsa/error.hpp"

namespace mcbtsa::ml {

std::vector<double> FeatureMatrix::column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = at(r, c);
    }
    return out;
}

FeatureMatrix build_feature_matrix(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts) {
    FeatureMatrix m;
    m.rows = ts.horizon();
    for (const auto& g : spec.generators) {
        m.names.push_back("F_" + g.name);
        m.kinds.push_back(ColumnKind::CapacityFactor);
    }
    m.names.push_back("D");
    m.kinds.push_back(ColumnKind::Demand);
    if (spec.market_participation) {
        m.names.push_back("price");
        m.kinds.push_back(ColumnKind::Price);
    }
    m.data.resize(m.rows * m.cols());
    for (std::size_t t = 0; t < m.rows; ++t) {
        std::size_t c = 0;
        for (std::size_t g = 0; g < spec.generators.size(); ++g) {
            m.at(t, c++) = gep::TimeSeriesTable::effective_factor(spec, ts, g, t);
        }
        m.at(t, c++) = ts.demand[t];
        if (spec.market_participation) {
            m.at(t, c) = ts.price[t];
        }
    }
    return m;
}

gep::TimeSeriesTable to_timeseries(const gep::SystemSpec& spec, const FeatureMatrix& features) {
    const std::size_t expected = spec.generators.size() + (spec.market_participation ? 2 : 1);
    if (features.cols() != expected) {
        throw ValidationError("feature matrix does not match the system");
    }
    gep::TimeSeriesTable ts;
    ts.capacity_factor.assign(spec.generators.size(), std::vector<double>(features.rows));
    ts.demand.resize(features.rows);
    ts.price.assign(features.rows, 0.0);
    const std::size_t d_col = spec.generators.size();
    for (std::size_t t = 0; t < features.rows; ++t) {
        for (std::size_t g = 0; g < spec.generators.size(); ++g) {
            ts.capacity_factor[g][t] = features.at(t, g);
        }
        ts.demand[t] = features.at(t, d_col);
        if (spec.market_participation) {
            ts.price[t] = features.at(t, d_col + 1);
        }
    }
    return ts;
}

KdeModel fit_kde(const FeatureMatrix& features) {
    if (features.rows == 0 || features.cols() == 0) {
        throw ValidationError("cannot fit a density to an empty matrix");
    }
    KdeModel model;
    model.training = features;
    const double n = static_cast<double>(features.rows);
    const double d = static_cast<double>(features.cols());
    const double factor = std::pow(n, -1.0 / (d + 4.0));
    model.bandwidths.resize(features.cols());
    for (std::size_t c = 0; c < features.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < features.rows; ++r) {
            mean += features.at(r, c);
        }
        mean /= n;
        double var = 0.0;
        for (std::size_t r = 0; r < features.rows; ++r) {
            const double z = features.at(r, c) - mean;
            var += z * z;
        }
        model.bandwidths[c] = std::sqrt(var / n) * factor;
    }
    return model;
}

double KdeModel::density(const std::vector<double>& point) const {
    if (point.size() != training.cols()) {
        throw ValidationError("density point has the wrong dimension");
    }
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    double total = 0.0;
    for (std::size_t r = 0; r < training.rows; ++r) {
        double k = 1.0;
        for (std::size_t c = 0; c < training.cols(); ++c) {
            const double h = bandwidths[c];
            if (h <= 0.0) {
                continue;
            }
            const double z = (point[c] - training.at(r, c)) / h;
            k *= inv_sqrt_2pi * std::exp(-0.5 * z * z) / h;
        }
        total += k;
    }
    return total / static_cast<double>(training.rows);
}

FeatureMatrix sample_kde(const KdeModel& model, std::size_t k, std::uint64_t seed) {
    if (k == 0) {
        throw ValidationError("at least one sample is required");
    }
    const auto& tr = model.training;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, tr.rows - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    FeatureMatrix out;
    out.rows = k;
    out.names = tr.names;
    out.kinds = tr.kinds;
    out.data.resize(k * tr.cols());
    for (std::size_t s = 0; s < k; ++s) {
        const std::size_t r = pick(rng);
        for (std::size_t c = 0; c < tr.cols(); ++c) {
            double v = tr.at(r, c);
            if (model.bandwidths[c] > 0.0) {
                v += model.bandwidths[c] * normal(rng);
            }
            if (tr.kinds[c] == ColumnKind::CapacityFactor) {
                v = std::clamp(v, 0.0, 1.0);
            } else {
                v = std::max(v, 0.0);
            }
            out.at(s, c) = v;
        }
    }
    return out;
}

}  // namespace mcbtsa::ml
