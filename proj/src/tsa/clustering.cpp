#include "mcbtsa/tsa/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>

#include "mcbtsa/error.hpp"

namespace mcbtsa::tsa {

FeatureSeries FeatureSeries::single(std::vector<double> values) {
    FeatureSeries f;
    f.columns.push_back(std::move(values));
    return f;
}

void FeatureSeries::validate() const {
    for (const auto& c : columns) {
        if (c.size() != horizon()) {
            throw ValidationError("feature columns have different lengths");
        }
        for (double v : c) {
            if (!std::isfinite(v)) {
                throw ValidationError("non-finite feature value");
            }
        }
    }
}

FeatureSeries standardize(const FeatureSeries& features) {
    FeatureSeries out = features;
    for (auto& c : out.columns) {
        if (c.empty()) {
            continue;
        }
        const double n = static_cast<double>(c.size());
        const double mean = std::accumulate(c.begin(), c.end(), 0.0) / n;
        double var = 0.0;
        for (double v : c) {
            var += (v - mean) * (v - mean);
        }
        const double sd = std::sqrt(var / n);
        for (double& v : c) {
            v = sd > 0.0 ? (v - mean) / sd : 0.0;
        }
    }
    return out;
}

FeatureSeries compute_net_demand(const gep::SystemSpec& spec, const gep::TimeSeriesTable& ts,
                                 const std::vector<double>& x_tilde) {
    if (x_tilde.size() != spec.generators.size()) {
        throw ValidationError("one capacity per generator is required");
    }
    std::vector<double> net(ts.horizon());
    for (std::size_t t = 0; t < ts.horizon(); ++t) {
        double supply = 0.0;
        for (std::size_t g = 0; g < spec.generators.size(); ++g) {
            supply += x_tilde[g] * gep::TimeSeriesTable::effective_factor(spec, ts, g, t);
        }
        net[t] = ts.demand[t] - spec.delta * supply;
    }
    return FeatureSeries::single(std::move(net));
}

ProtectedSet build_protected_set(const FeatureSeries& net_demand, std::size_t n_top) {
    if (net_demand.dims() != 1) {
        throw ValidationError("net demand must be a single feature");
    }
    const auto& v = net_demand.columns[0];
    if (n_top > v.size()) {
        throw ValidationError("n_top exceeds the horizon");
    }
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    ProtectedSet set;
    set.steps.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_top));
    std::sort(set.steps.begin(), set.steps.end());
    return set;
}

std::vector<std::size_t> clustering_domain(std::size_t horizon, const ProtectedSet& protected_steps) {
    std::vector<char> skip(horizon, 0);
    for (auto t : protected_steps.steps) {
        if (t >= horizon) {
            throw ValidationError("protected step outside the horizon");
        }
        skip[t] = 1;
    }
    std::vector<std::size_t> domain;
    for (std::size_t t = 0; t < horizon; ++t) {
        if (!skip[t]) {
            domain.push_back(t);
        }
    }
    return domain;
}

std::size_t count_runs(const std::vector<std::size_t>& domain) {
    std::size_t runs = 0;
    for (std::size_t i = 0; i < domain.size(); ++i) {
        if (i == 0 || domain[i] != domain[i - 1] + 1) {
            ++runs;
        }
    }
    return runs;
}

namespace {

struct Cluster {
    std::size_t first = 0;  ///< position in domain
    std::size_t size = 0;
    std::vector<double> sum;
    int prev = -1;
    int next = -1;  ///< -1 at the end of a run
    unsigned version = 0;
    bool alive = true;
};

struct Candidate {
    double d;
    std::size_t left_first;
    int left;
    int right;
    unsigned left_version;
    unsigned right_version;
};

struct Later {
    bool operator()(const Candidate& a, const Candidate& b) const {
        if (a.d != b.d) {
            return a.d > b.d;
        }
        return a.left_first > b.left_first;
    }
};

double centroid_distance(const Cluster& a, const Cluster& b) {
    double sq = 0.0;
    for (std::size_t j = 0; j < a.sum.size(); ++j) {
        const double diff = a.sum[j] / static_cast<double>(a.size) - b.sum[j] / static_cast<double>(b.size);
        sq += diff * diff;
    }
    return std::sqrt(sq);
}

}  // namespace

std::vector<std::vector<std::size_t>> chronological_cluster(const FeatureSeries& features,
                                                            const std::vector<std::size_t>& domain,
                                                            std::size_t r_target, ClusterTree* history) {
    features.validate();
    if (history) {
        history->merges.clear();
    }
    if (domain.empty()) {
        return {};
    }
    for (std::size_t i = 0; i < domain.size(); ++i) {
        if (domain[i] >= features.horizon() || (i > 0 && domain[i] <= domain[i - 1])) {
            throw ValidationError("clustering domain must be ascending steps within the horizon");
        }
    }
    const std::size_t runs = count_runs(domain);
    if (r_target < runs) {
        throw InfeasibleTargetError("target of " + std::to_string(r_target) + " groups is below the " +
                                    std::to_string(runs) + " runs separated by protected steps");
    }
    if (r_target > domain.size()) {
        throw InfeasibleTargetError("target of " + std::to_string(r_target) + " groups exceeds the " +
                                    std::to_string(domain.size()) + " clustered steps");
    }

    const std::size_t n = domain.size();
    std::vector<Cluster> clusters(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& c = clusters[i];
        c.first = i;
        c.size = 1;
        c.sum.resize(features.dims());
        for (std::size_t j = 0; j < features.dims(); ++j) {
            c.sum[j] = features.columns[j][domain[i]];
        }
        const bool starts_run = i == 0 || domain[i] != domain[i - 1] + 1;
        const bool ends_run = i + 1 == n || domain[i + 1] != domain[i] + 1;
        c.prev = starts_run ? -1 : static_cast<int>(i) - 1;
        c.next = ends_run ? -1 : static_cast<int>(i) + 1;
    }

    std::priority_queue<Candidate, std::vector<Candidate>, Later> heap;
    auto push = [&](int l, int r) {
        const auto& a = clusters[static_cast<std::size_t>(l)];
        const auto& b = clusters[static_cast<std::size_t>(r)];
        heap.push({centroid_distance(a, b), a.first, l, r, a.version, b.version});
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (clusters[i].next >= 0) {
            push(static_cast<int>(i), clusters[i].next);
        }
    }

    std::size_t groups = n;
    while (groups > r_target) {
        const Candidate top = heap.top();
        heap.pop();
        auto& l = clusters[static_cast<std::size_t>(top.left)];
        auto& r = clusters[static_cast<std::size_t>(top.right)];
        if (!l.alive || !r.alive || l.version != top.left_version || r.version != top.right_version ||
            l.next != top.right) {
            continue;
        }
        if (history) {
            history->merges.push_back({domain[l.first], domain[r.first], l.size, r.size, top.d});
        }
        l.size += r.size;
        for (std::size_t j = 0; j < l.sum.size(); ++j) {
            l.sum[j] += r.sum[j];
        }
        l.next = r.next;
        if (r.next >= 0) {
            clusters[static_cast<std::size_t>(r.next)].prev = top.left;
        }
        r.alive = false;
        ++l.version;
        --groups;
        if (l.prev >= 0) {
            push(l.prev, top.left);
        }
        if (l.next >= 0) {
            push(top.left, l.next);
        }
    }

    std::vector<std::vector<std::size_t>> out;
    for (const auto& c : clusters) {
        if (!c.alive) {
            continue;
        }
        std::vector<std::size_t> g(c.size);
        for (std::size_t k = 0; k < c.size; ++k) {
            g[k] = domain[c.first + k];
        }
        out.push_back(std::move(g));
    }
    return out;
}

gep::Aggregation assemble_aggregation(const std::vector<std::vector<std::size_t>>& groups,
                                      const ProtectedSet& protected_steps, std::size_t horizon) {
    std::vector<std::pair<std::vector<std::size_t>, bool>> all;
    for (const auto& g : groups) {
        if (g.empty()) {
            throw InvalidAggregationError("empty cluster");
        }
        all.emplace_back(g, false);
    }
    for (auto t : protected_steps.steps) {
        all.push_back({{t}, true});
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const auto& a, const auto& b) { return a.first.front() < b.first.front(); });
    gep::Aggregation agg;
    for (auto& [g, p] : all) {
        agg.groups.push_back(std::move(g));
        agg.is_protected.push_back(p);
    }
    agg.validate(horizon);
    return agg;
}

namespace {

double l1(const FeatureSeries& f, std::size_t a, std::size_t b) {
    double d = 0.0;
    for (const auto& c : f.columns) {
        d += std::abs(c[a] - c[b]);
    }
    return d;
}

}  // namespace

KMedoidsResult kmedoids_cluster(const FeatureSeries& features, std::size_t r_target, std::uint64_t seed,
                                const std::vector<std::size_t>& domain) {
    features.validate();
    std::vector<std::size_t> pts = domain;
    if (pts.empty()) {
        pts.resize(features.horizon());
        std::iota(pts.begin(), pts.end(), 0);
    }
    const std::size_t n = pts.size();
    if (r_target == 0 || r_target > n) {
        throw InfeasibleTargetError("k-medoids target must be between 1 and " + std::to_string(n));
    }
    auto dist = [&](std::size_t i, std::size_t j) { return l1(features, pts[i], pts[j]); };

    // BUILD: greedy additions; candidates scanned in a seeded order, strict improvement only.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> nearest(n, inf);
    std::vector<char> is_medoid(n, 0);
    std::vector<std::size_t> med;
    while (med.size() < r_target) {
        double best = inf;
        std::size_t pick = n;
        for (auto c : order) {
            if (is_medoid[c]) {
                continue;
            }
            double total = 0.0;
            for (std::size_t o = 0; o < n; ++o) {
                total += std::min(nearest[o], dist(o, c));
            }
            if (total < best) {
                best = total;
                pick = c;
            }
        }
        is_medoid[pick] = 1;
        med.push_back(pick);
        for (std::size_t o = 0; o < n; ++o) {
            nearest[o] = std::min(nearest[o], dist(o, pick));
        }
    }

    const std::size_t k = med.size();
    std::vector<std::size_t> near_idx(n);
    std::vector<double> d_near(n);
    std::vector<double> d_second(n);
    auto assign = [&] {
        double cost = 0.0;
        for (std::size_t o = 0; o < n; ++o) {
            d_near[o] = inf;
            d_second[o] = inf;
            for (std::size_t i = 0; i < k; ++i) {
                const double d = dist(o, med[i]);
                if (d < d_near[o]) {
                    d_second[o] = d_near[o];
                    d_near[o] = d;
                    near_idx[o] = i;
                } else if (d < d_second[o]) {
                    d_second[o] = d;
                }
            }
            cost += d_near[o];
        }
        return cost;
    };
    double cost = assign();

    // FastPAM1 swap phase: best (medoid, candidate) swap per pass.
    const double eps = 1e-12 * std::max(1.0, cost);
    std::vector<double> removal(k);
    std::vector<double> delta(k);
    for (;;) {
        std::fill(removal.begin(), removal.end(), 0.0);
        for (std::size_t o = 0; o < n; ++o) {
            if (k > 1) {
                removal[near_idx[o]] += d_second[o] - d_near[o];
            }
        }
        double best = -eps;
        std::size_t best_i = k;
        std::size_t best_c = n;
        for (std::size_t c = 0; c < n; ++c) {
            if (is_medoid[c]) {
                continue;
            }
            delta = removal;
            double shared = 0.0;
            for (std::size_t o = 0; o < n; ++o) {
                const double d = dist(o, c);
                if (d < d_near[o]) {
                    shared += d - d_near[o];
                    delta[near_idx[o]] += d_near[o] - d_second[o];
                } else if (d < d_second[o]) {
                    delta[near_idx[o]] += d - d_second[o];
                }
            }
            if (k == 1) {
                // Only one medoid: removing it leaves no second choice.
                double total = 0.0;
                for (std::size_t o = 0; o < n; ++o) {
                    total += dist(o, c);
                }
                delta[0] = total - cost;
                shared = 0.0;
            }
            for (std::size_t i = 0; i < k; ++i) {
                if (delta[i] + shared < best) {
                    best = delta[i] + shared;
                    best_i = i;
                    best_c = c;
                }
            }
        }
        if (best_i == k) {
            break;
        }
        is_medoid[med[best_i]] = 0;
        is_medoid[best_c] = 1;
        med[best_i] = best_c;
        const double next = assign();
        if (!(next < cost)) {
            break;
        }
        cost = next;
    }

    // Report medoids and groups in step order; ties go to the earliest medoid.
    std::vector<std::size_t> by_time(k);
    std::iota(by_time.begin(), by_time.end(), 0);
    std::sort(by_time.begin(), by_time.end(), [&](std::size_t a, std::size_t b) { return pts[med[a]] < pts[med[b]]; });
    KMedoidsResult out;
    out.groups.resize(k);
    for (auto i : by_time) {
        out.medoids.push_back(pts[med[i]]);
    }
    out.cost = 0.0;
    for (std::size_t o = 0; o < n; ++o) {
        std::size_t pick = 0;
        double d_best = inf;
        for (std::size_t r = 0; r < k; ++r) {
            const double d = l1(features, pts[o], out.medoids[r]);
            if (d < d_best) {
                d_best = d;
                pick = r;
            }
        }
        out.groups[pick].push_back(pts[o]);
        out.cost += d_best;
    }
    return out;
}

gep::Aggregation assemble_medoid_aggregation(const KMedoidsResult& clusters, const ProtectedSet& protected_steps,
                                             std::size_t horizon) {
    struct Entry {
        std::size_t medoid;
        std::vector<std::size_t> members;
        bool prot;
    };
    std::vector<Entry> all;
    for (std::size_t i = 0; i < clusters.medoids.size(); ++i) {
        all.push_back({clusters.medoids[i], clusters.groups[i], false});
    }
    for (auto t : protected_steps.steps) {
        all.push_back({t, {t}, true});
    }
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.medoid < b.medoid; });
    gep::Aggregation agg;
    agg.representation = gep::Representation::Medoid;
    for (auto& e : all) {
        agg.groups.push_back(std::move(e.members));
        agg.is_protected.push_back(e.prot);
        agg.medoids.push_back(e.medoid);
    }
    agg.validate(horizon);
    return agg;
}

void write_aggregation_csv(std::ostream& out, const gep::Aggregation& agg) {
    const bool medoid = agg.representation == gep::Representation::Medoid;
    std::size_t horizon = 0;
    for (const auto& g : agg.groups) {
        horizon += g.size();
    }
    std::vector<std::size_t> rep(horizon);
    for (std::size_t r = 0; r < agg.size(); ++r) {
        for (auto t : agg.groups[r]) {
            if (t >= horizon) {
                throw InvalidAggregationError("aggregation does not partition its horizon");
            }
            rep[t] = r;
        }
    }
    out << "original_step,representative_id,weight" << (medoid ? ",medoid_step" : "") << '\n';
    for (std::size_t t = 0; t < horizon; ++t) {
        const auto r = rep[t];
        out << t + 1 << ',' << r + 1 << ',' << agg.groups[r].size();
        if (medoid) {
            out << ',' << agg.medoids[r] + 1;
        }
        out << '\n';
    }
}

gep::Aggregation read_aggregation_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("aggregation CSV is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    bool medoid = false;
    if (line == "original_step,representative_id,weight,medoid_step") {
        medoid = true;
    } else if (line != "original_step,representative_id,weight") {
        throw IoError("aggregation CSV: unexpected header '" + line + "'");
    }
    gep::Aggregation agg;
    if (medoid) {
        agg.representation = gep::Representation::Medoid;
    }
    std::size_t row = 1;
    std::vector<std::size_t> weights;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") {
            continue;
        }
        std::vector<long long> v;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const auto comma = line.find(',', pos);
            const auto cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            try {
                std::size_t used = 0;
                v.push_back(std::stoll(cell, &used));
            } catch (const std::exception&) {
                throw IoError("aggregation CSV row " + std::to_string(row) + ": bad integer '" + cell + "'");
            }
            if (comma == std::string::npos) {
                break;
            }
            pos = comma + 1;
        }
        if (v.size() != (medoid ? 4u : 3u) || v[0] < 1 || v[1] < 1 || v[2] < 1 || (medoid && v[3] < 1)) {
            throw IoError("aggregation CSV row " + std::to_string(row) + ": malformed");
        }
        const auto r = static_cast<std::size_t>(v[1] - 1);
        if (r >= agg.groups.size()) {
            agg.groups.resize(r + 1);
            weights.resize(r + 1, 0);
            if (medoid) {
                agg.medoids.resize(r + 1, 0);
            }
        }
        agg.groups[r].push_back(static_cast<std::size_t>(v[0] - 1));
        weights[r] = static_cast<std::size_t>(v[2]);
        if (medoid) {
            agg.medoids[r] = static_cast<std::size_t>(v[3] - 1);
        }
    }
    std::size_t horizon = 0;
    for (std::size_t r = 0; r < agg.size(); ++r) {
        if (agg.groups[r].size() != weights[r]) {
            throw InvalidAggregationError("aggregation CSV: weight of representative " + std::to_string(r + 1) +
                                          " does not match its member count");
        }
        std::sort(agg.groups[r].begin(), agg.groups[r].end());
        horizon += agg.groups[r].size();
    }
    agg.is_protected.assign(agg.size(), false);
    agg.validate(horizon);
    return agg;
}

}  // namespace mcbtsa::tsa
