#ifndef HBUNDLE_BINNING_HPP
#define HBUNDLE_BINNING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hbundle/core.hpp"
#include "hbundle/parallel.hpp"

namespace hbundle {

enum class Criterion
{
    none,
    orientation,
    origin,
    destination,
    origin_destination,
    length,
    file,
};

inline Criterion parse_criterion(std::string_view name)
{
    if (name == "none") return Criterion::none;
    if (name == "orientation") return Criterion::orientation;
    if (name == "origin") return Criterion::origin;
    if (name == "destination") return Criterion::destination;
    if (name == "od") return Criterion::origin_destination;
    if (name == "length") return Criterion::length;
    if (name == "file") return Criterion::file;
    throw Error("unknown criterion '" + std::string(name) + "'");
}

inline std::string_view criterion_name(Criterion c)
{
    switch (c) {
    case Criterion::none: return "none";
    case Criterion::orientation: return "orientation";
    case Criterion::origin: return "origin";
    case Criterion::destination: return "destination";
    case Criterion::origin_destination: return "od";
    case Criterion::length: return "length";
    case Criterion::file: return "file";
    }
    return "none";
}

/// Whether the criterion groups edges by flow direction.
inline bool is_directional(Criterion c)
{
    return c == Criterion::orientation || c == Criterion::origin_destination;
}

/// Dense row-major matrix, one row per edge.
struct FeatureMatrix
{
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    double* row(std::size_t i) { return values.data() + i * cols; }
    const double* row(std::size_t i) const { return values.data() + i * cols; }
};

inline FeatureMatrix edge_features(const Graph& g, Criterion c)
{
    std::size_t cols = 0;
    switch (c) {
    case Criterion::origin:
    case Criterion::destination: cols = 2; break;
    case Criterion::origin_destination: cols = 4; break;
    case Criterion::length: cols = 1; break;
    default: throw Error("criterion '" + std::string(criterion_name(c)) + "' has no clustering features");
    }
    FeatureMatrix f(g.edges.size(), cols);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const Vec2 s = g.source_position(g.edges[i]);
        const Vec2 t = g.target_position(g.edges[i]);
        double* r = f.row(i);
        switch (c) {
        case Criterion::origin: r[0] = s.x; r[1] = s.y; break;
        case Criterion::destination: r[0] = t.x; r[1] = t.y; break;
        case Criterion::origin_destination: r[0] = s.x; r[1] = s.y; r[2] = t.x; r[3] = t.y; break;
        default: r[0] = distance(s, t); break;
        }
    }
    return f;
}

/// Angular slices centred on multiples of 360/slices degrees, slice 0 on +x.
inline std::vector<int> bin_by_orientation(const Graph& g, int slices)
{
    if (slices < 2)
        throw Error("orientation binning needs at least 2 slices");
    const double width = 360.0 / slices;
    std::vector<int> bins(g.edges.size());
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const Vec2 d = g.target_position(g.edges[i]) - g.source_position(g.edges[i]);
        const double degrees = std::atan2(d.y, d.x) * 180.0 / std::numbers::pi;
        const long slice = std::lround(degrees / width);
        bins[i] = static_cast<int>(((slice % slices) + slices) % slices);
    }
    return bins;
}

struct Clustering
{
    int k = 0;
    std::vector<int> assignment;
    std::vector<double> centroids; ///< k x cols, row-major
    double inertia = 0.0;
    int iterations = 0;
};

namespace detail {

inline double squared_distance(const double* a, const double* b, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline std::vector<std::size_t> distinct_row_representatives(const FeatureMatrix& f)
{
    std::vector<std::size_t> order(f.rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(f.row(a), f.row(a) + f.cols, f.row(b), f.row(b) + f.cols);
    };
    std::sort(order.begin(), order.end(), less);
    std::vector<std::size_t> reps;
    for (std::size_t i = 0; i < order.size(); ++i)
        if (i == 0 || less(order[i - 1], order[i]))
            reps.push_back(order[i]);
    return reps;
}

inline void update_centroids(const FeatureMatrix& f, Clustering& c, std::vector<std::size_t>& counts)
{
    std::fill(c.centroids.begin(), c.centroids.end(), 0.0);
    std::fill(counts.begin(), counts.end(), std::size_t{0});
    for (std::size_t i = 0; i < f.rows; ++i) {
        const auto a = static_cast<std::size_t>(c.assignment[i]);
        ++counts[a];
        double* centroid = c.centroids.data() + a * f.cols;
        for (std::size_t j = 0; j < f.cols; ++j)
            centroid[j] += f.row(i)[j];
    }
    for (std::size_t a = 0; a < counts.size(); ++a)
        if (counts[a] > 0)
            for (std::size_t j = 0; j < f.cols; ++j)
                c.centroids[a * f.cols + j] /= static_cast<double>(counts[a]);
}

inline double inertia_of(const FeatureMatrix& f, const Clustering& c)
{
    double total = 0.0;
    for (std::size_t i = 0; i < f.rows; ++i)
        total += squared_distance(f.row(i), c.centroids.data() + static_cast<std::size_t>(c.assignment[i]) * f.cols,
                                  f.cols);
    return total;
}

inline std::uint64_t restart_seed(std::uint64_t seed, std::uint64_t restart)
{
    // splitmix64 over (seed, restart)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (restart + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

inline std::size_t distinct_rows(const FeatureMatrix& f) { return detail::distinct_row_representatives(f).size(); }

/// One Lloyd run from k distinct rows drawn with `rng_seed`. When `history` is given,
/// the inertia after every centroid update is appended to it.
inline Clustering kmeans_single(const FeatureMatrix& f, int k, std::uint64_t rng_seed, int max_iterations = 100,
                                std::vector<double>* history = nullptr,
                                const std::vector<std::size_t>* distinct = nullptr)
{
    if (k < 1)
        throw Error("k must be positive");
    const auto reps = distinct ? *distinct : detail::distinct_row_representatives(f);
    if (static_cast<std::size_t>(k) > reps.size())
        throw Error("k exceeds distinct points");

    std::mt19937_64 rng(rng_seed);
    std::vector<std::size_t> seeds = reps;
    // Partial Fisher-Yates: the first k entries become a uniform k-subset.
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), seeds.size() - 1);
        std::swap(seeds[static_cast<std::size_t>(i)], seeds[pick(rng)]);
    }

    const std::size_t cols = f.cols;
    Clustering c;
    c.k = k;
    c.assignment.assign(f.rows, -1);
    c.centroids.resize(static_cast<std::size_t>(k) * cols);
    for (int a = 0; a < k; ++a)
        std::copy_n(f.row(seeds[static_cast<std::size_t>(a)]), cols, c.centroids.data() + static_cast<std::size_t>(a) * cols);

    std::vector<std::size_t> counts(static_cast<std::size_t>(k));
    for (c.iterations = 0; c.iterations < max_iterations; ++c.iterations) {
        bool changed = false;
        for (std::size_t i = 0; i < f.rows; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int a = 0; a < k; ++a) {
                const double d = detail::squared_distance(f.row(i), c.centroids.data() + static_cast<std::size_t>(a) * cols, cols);
                if (d < best_d) {
                    best_d = d;
                    best = a;
                }
            }
            if (c.assignment[i] != best) {
                c.assignment[i] = best;
                changed = true;
            }
        }
        if (!changed)
            break;
        detail::update_centroids(f, c, counts);

        // Empty clusters take the point farthest from its own centroid.
        for (int a = 0; a < k; ++a) {
            if (counts[static_cast<std::size_t>(a)] > 0)
                continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < f.rows; ++i) {
                if (counts[static_cast<std::size_t>(c.assignment[i])] < 2)
                    continue;
                const double d = detail::squared_distance(
                    f.row(i), c.centroids.data() + static_cast<std::size_t>(c.assignment[i]) * cols, cols);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far_d < 0.0)
                break;
            c.assignment[far] = a;
            detail::update_centroids(f, c, counts);
        }
        if (history)
            history->push_back(detail::inertia_of(f, c));
    }
    c.inertia = detail::inertia_of(f, c);
    return c;
}

/// Best of `restarts` Lloyd runs by (inertia, restart index).
inline Clustering kmeans(const FeatureMatrix& f, int k, int restarts, std::uint64_t seed, unsigned workers = 1)
{
    if (k < 2)
        throw Error("k must be at least 2");
    if (f.rows < static_cast<std::size_t>(k))
        throw Error("fewer rows than clusters");
    const auto reps = detail::distinct_row_representatives(f);
    if (static_cast<std::size_t>(k) > reps.size())
        throw Error("k exceeds distinct points");
    restarts = std::max(restarts, 1);

    std::vector<Clustering> runs(static_cast<std::size_t>(restarts));
    parallel_for(runs.size(), workers, [&](WorkRange r) {
        for (std::size_t i = r.begin; i < r.end; ++i)
            runs[i] = kmeans_single(f, k, detail::restart_seed(seed, i), 100, nullptr, &reps);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i)
        if (runs[i].inertia < runs[best].inertia)
            best = i;
    return std::move(runs[best]);
}

/// Mean over clusters of max_j (s_i + s_j) / d_ij, where s is the mean member
/// distance to the centroid and d the centroid distance. Lower is better.
inline double davies_bouldin(const FeatureMatrix& f, const Clustering& c)
{
    if (c.k < 2)
        throw Error("Davies-Bouldin index needs at least 2 clusters");
    const std::size_t k = static_cast<std::size_t>(c.k);
    const std::size_t cols = f.cols;
    if (c.assignment.size() != f.rows)
        throw Error("assignment size does not match feature rows");
    for (int a : c.assignment)
        if (a < 0 || a >= c.k)
            throw Error("assignment out of range");
    Clustering means = c;
    means.centroids.assign(k * cols, 0.0);
    std::vector<std::size_t> counts(k);
    detail::update_centroids(f, means, counts);
    for (std::size_t a = 0; a < k; ++a)
        if (counts[a] == 0)
            throw Error("degenerate clustering");

    std::vector<double> scatter(k, 0.0);
    for (std::size_t i = 0; i < f.rows; ++i) {
        const auto a = static_cast<std::size_t>(c.assignment[i]);
        scatter[a] += std::sqrt(detail::squared_distance(f.row(i), means.centroids.data() + a * cols, cols));
    }
    for (std::size_t a = 0; a < k; ++a)
        scatter[a] /= static_cast<double>(counts[a]);

    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j)
                continue;
            const double d = std::sqrt(
                detail::squared_distance(means.centroids.data() + i * cols, means.centroids.data() + j * cols, cols));
            const double ratio = d > 0.0 ? (scatter[i] + scatter[j]) / d : std::numeric_limits<double>::infinity();
            worst = std::max(worst, ratio);
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

struct BinSelection
{
    std::vector<int> bins;
    int bin_count = 1;
    std::vector<double> scores; ///< Davies-Bouldin index per candidate k, from kmin; NaN when infeasible
};

/// K-means for each k in [kmin, kmax], keeping the clustering with the lowest
/// Davies-Bouldin index; ties go to the smaller k. Candidates with more
/// clusters than distinct rows are skipped; if none is feasible every edge lands
/// in bin 0 and the bin count is kmin.
inline BinSelection select_bins(const FeatureMatrix& f, int kmin, int kmax, int restarts, std::uint64_t seed,
                                unsigned workers = 1)
{
    if (kmin < 2 || kmax < kmin)
        throw Error("bin range must satisfy 2 <= kmin <= kmax");
    const std::size_t distinct = distinct_rows(f);

    BinSelection best;
    best.bins.assign(f.rows, 0);
    best.bin_count = kmin;
    double best_score = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int k = kmin; k <= kmax; ++k) {
        if (static_cast<std::size_t>(k) > distinct || static_cast<std::size_t>(k) > f.rows) {
            best.scores.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        Clustering c = kmeans(f, k, restarts, detail::restart_seed(seed, 1000003ULL * static_cast<std::uint64_t>(k)),
                              workers);
        const double score = davies_bouldin(f, c);
        best.scores.push_back(score);
        if (!found || score < best_score) {
            found = true;
            best_score = score;
            best.bins = std::move(c.assignment);
            best.bin_count = k;
        }
    }
    return best;
}

/// Renumbers clusters by ascending first centroid coordinate (ordinal 1D bins).
inline void relabel_by_centroid(Clustering& c, std::size_t cols)
{
    std::vector<int> order(static_cast<std::size_t>(c.k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return c.centroids[static_cast<std::size_t>(a) * cols] < c.centroids[static_cast<std::size_t>(b) * cols];
    });
    std::vector<int> rank(order.size());
    std::vector<double> sorted(c.centroids.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        rank[static_cast<std::size_t>(order[r])] = static_cast<int>(r);
        std::copy_n(c.centroids.data() + static_cast<std::size_t>(order[r]) * cols, cols, sorted.data() + r * cols);
    }
    for (int& a : c.assignment)
        a = rank[static_cast<std::size_t>(a)];
    c.centroids = std::move(sorted);
}

/// Renumbers bins by ascending mean of the first feature column.
inline void order_bins_by_feature(std::vector<int>& bins, int bin_count, const FeatureMatrix& f)
{
    std::vector<double> sums(static_cast<std::size_t>(bin_count), 0.0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(bin_count), 0);
    for (std::size_t i = 0; i < bins.size(); ++i) {
        sums[static_cast<std::size_t>(bins[i])] += f.row(i)[0];
        ++counts[static_cast<std::size_t>(bins[i])];
    }
    Clustering c;
    c.k = bin_count;
    c.assignment = bins;
    c.centroids.resize(sums.size());
    for (std::size_t a = 0; a < sums.size(); ++a)
        c.centroids[a] = counts[a] > 0 ? sums[a] / static_cast<double>(counts[a]) : std::numeric_limits<double>::infinity();
    relabel_by_centroid(c, 1);
    bins = std::move(c.assignment);
}

} // namespace hbundle

#endif // HBUNDLE_BINNING_HPP
