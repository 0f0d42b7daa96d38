#ifndef HBUNDLE_BUNDLER_HPP
#define HBUNDLE_BUNDLER_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "hbundle/core.hpp"
#include "hbundle/graph_io.hpp"
#include "hbundle/parallel.hpp"
#include "hbundle/raster.hpp"

namespace hbundle {

/// Straight-line polylines with ceil(len / delta) equal segments; delta in grid cells.
inline std::vector<SampledEdge> initial_sample(const Graph& g, const GridTransform& t, double delta)
{
    if (!(delta > 0.0))
        throw Error("sampling step must be positive");
    std::vector<SampledEdge> sampled(g.edges.size());
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const Vec2 s = g.source_position(g.edges[i]);
        const Vec2 e = g.target_position(g.edges[i]);
        const double cells = distance(s, e) / t.cell_size;
        const auto segments = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cells / delta - 1e-9)));
        SampledEdge& out = sampled[i];
        out.edge_index = i;
        out.points.reserve(segments + 1);
        out.points.push_back(s);
        for (std::size_t k = 1; k < segments; ++k)
            out.points.push_back(lerp(s, e, static_cast<double>(k) / static_cast<double>(segments)));
        out.points.push_back(e);
    }
    return sampled;
}

/// Shifts interior points by fraction * (dominant grid dimension) cells along the
/// left normal of the source -> target direction, so opposite edges part ways.
inline void apply_directed_offset(std::span<SampledEdge> sampled, double fraction, const GridTransform& t)
{
    if (!(fraction >= 0.0))
        throw Error("offset fraction must be non-negative");
    if (fraction == 0.0)
        return;
    const double shift = fraction * t.dominant();
    for (auto& s : sampled) {
        if (s.points.size() < 3)
            continue;
        const Vec2 d = t.to_grid(s.points.back()) - t.to_grid(s.points.front());
        const double len = norm(d);
        if (len == 0.0)
            continue;
        const Vec2 offset = left_normal(d / len) * shift;
        for (std::size_t k = 1; k + 1 < s.points.size(); ++k)
            s.points[k] = t.to_world(t.clamp_interior(t.to_grid(s.points[k]) + offset));
    }
}

/// Central differences at the four cells around `g`, bilinearly blended.
inline Vec2 gradient_at(const DensityField& field, int layer, Vec2 g)
{
    const Layer& L = field.layers[static_cast<std::size_t>(layer)];
    const int w = L.width();
    const int h = L.height();
    const int x0 = std::clamp(static_cast<int>(std::floor(g.x)), 1, w - 3);
    const int y0 = std::clamp(static_cast<int>(std::floor(g.y)), 1, h - 3);
    const double fx = std::clamp(g.x - x0, 0.0, 1.0);
    const double fy = std::clamp(g.y - y0, 0.0, 1.0);
    auto grad = [&](int x, int y) {
        return Vec2{0.5 * (static_cast<double>(L(x + 1, y)) - L(x - 1, y)),
                    0.5 * (static_cast<double>(L(x, y + 1)) - L(x, y - 1))};
    };
    const Vec2 top = lerp(grad(x0, y0), grad(x0 + 1, y0), fx);
    const Vec2 bottom = lerp(grad(x0, y0 + 1), grad(x0 + 1, y0 + 1), fx);
    return lerp(top, bottom, fy);
}

struct AdvectResult
{
    Vec2 point;
    bool moved = false;
};

/// Moves `p` (grid coordinates) along the normalised density gradient.
///
/// In adaptive mode the step starts at h and is halved until the bilinear density
/// at the candidate is not lower than at `p`; once the step drops below
/// `min_step` the point stays put. Fixed mode always takes the full step.
/// Candidates are clamped to the grid interior before they are evaluated.
inline AdvectResult advect_point(Vec2 p, const DensityField& field, int layer, double h, double epsilon,
                                 double min_step = 0.25, AdvectionMode mode = AdvectionMode::adaptive)
{
    const GridTransform& t = field.transform;
    const Vec2 grad = gradient_at(field, layer, p);
    const Vec2 dir = grad / std::max(norm(grad), epsilon);

    if (mode == AdvectionMode::fixed) {
        const Vec2 c = t.clamp_interior(p + dir * h);
        return {c, c != p};
    }

    const Layer& L = field.layers[static_cast<std::size_t>(layer)];
    const double here = density_at(L, p);
    for (double m = h; m >= min_step; m *= 0.5) {
        const Vec2 c = t.clamp_interior(p + dir * m);
        if (density_at(L, c) >= here)
            return {c, c != p};
    }
    return {p, false};
}

/// Jacobi passes of x <- x + factor * ((prev + next) / 2 - x); endpoints fixed.
inline void laplacian_smooth(SampledEdge& polyline, double factor, int passes)
{
    if (!(factor > 0.0 && factor <= 1.0))
        throw Error("laplacian factor must be in (0, 1]");
    auto& pts = polyline.points;
    if (pts.size() < 3)
        return;
    std::vector<Vec2> prev;
    for (int pass = 0; pass < passes; ++pass) {
        prev = pts;
        for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
            const Vec2 mid = (prev[k - 1] + prev[k + 1]) * 0.5;
            pts[k] = prev[k] + (mid - prev[k]) * factor;
        }
    }
}

/// Drops points closer than delta/2 to the last kept point and splits gaps wider
/// than 1.5*delta into equal pieces of about delta. `delta` is in the units of
/// the points. Endpoints are always kept.
inline void resample(SampledEdge& polyline, double delta, std::vector<Vec2>* scratch = nullptr)
{
    if (!(delta > 0.0))
        throw Error("sampling step must be positive");
    auto& pts = polyline.points;
    if (pts.size() < 2)
        return;

    const double lo = 0.5 * delta;
    const double hi = 1.5 * delta;

    std::vector<Vec2> local;
    std::vector<Vec2>& kept = scratch ? *scratch : local;
    kept.clear();
    kept.push_back(pts.front());
    for (std::size_t k = 1; k + 1 < pts.size(); ++k)
        if (distance(kept.back(), pts[k]) >= lo)
            kept.push_back(pts[k]);
    if (kept.size() > 1 && distance(kept.back(), pts.back()) < lo)
        kept.pop_back();
    kept.push_back(pts.back());

    bool conforming = kept.size() == pts.size();
    for (std::size_t k = 0; conforming && k + 1 < kept.size(); ++k)
        conforming = distance(kept[k], kept[k + 1]) <= hi;
    if (conforming)
        return; // nothing dropped, nothing to split

    pts.clear();
    pts.push_back(kept.front());
    for (std::size_t k = 0; k + 1 < kept.size(); ++k) {
        const Vec2 a = kept[k];
        const Vec2 b = kept[k + 1];
        const double gap = distance(a, b);
        if (gap > hi) {
            const long pieces = std::max(2L, std::lround(gap / delta));
            for (long j = 1; j < pieces; ++j)
                pts.push_back(lerp(a, b, static_cast<double>(j) / static_cast<double>(pieces)));
        }
        pts.push_back(b);
    }
}

/// Bandwidth at iteration i (0-based): lambda^i * h_max.
inline double bandwidth_at(int iteration, double h_max, double lambda)
{
    return std::pow(lambda, iteration) * h_max;
}

struct IterationState
{
    int iteration = 0;
    double bandwidth = 0.0;
    std::span<const SampledEdge> edges;
    const DensityField* density = nullptr;
    const IterationMetrics* metrics = nullptr;
};

struct BundleHooks
{
    std::function<void(const IterationState&)> on_iteration;
};

/// Full bundling pipeline. `bins` overrides the edge bins of `graph` when non-empty;
/// the interaction matrix fixes the layer count.
inline BundleResult bundle(const Graph& graph, std::span<const int> bins, const InteractionMatrix& m,
                           const BundleConfig& config, const BundleHooks& hooks = {})
{
    using clock = std::chrono::steady_clock;
    config.validate();

    BundleResult result;
    result.graph = graph;
    Graph& g = result.graph;
    if (!bins.empty()) {
        if (bins.size() != g.edges.size())
            throw Error("bin assignment size does not match edge count");
        for (std::size_t i = 0; i < bins.size(); ++i)
            g.edges[i].bin = bins[i];
    }
    g.bin_count = m.size();
    g.validate();

    const unsigned workers = std::max(1u, config.workers);
    const double sigma = config.resolved_sigma();
    const double h_max = config.resolved_h_max();
    const GridTransform t = make_transform(g.nodes, config.grid_size, config.padding_cells());
    const double delta_world = config.delta * t.cell_size;

    result.edges = initial_sample(g, t, config.delta);
    auto& edges = result.edges;
    if (config.directed_offset_fraction > 0.0)
        apply_directed_offset(edges, config.directed_offset_fraction, t);
    for (const auto& s : edges)
        result.initial_samples += s.points.size();

    struct Partial
    {
        std::size_t interior = 0;
        std::size_t moved = 0;
        std::size_t decreases = 0;
        double displacement = 0.0;
        double max_displacement = 0.0;
    };

    for (int it = 0; it < config.iterations; ++it) {
        const auto start = clock::now();
        IterationMetrics metrics;
        metrics.iteration = it;
        metrics.bandwidth = bandwidth_at(it, h_max, config.lambda);

        if (it > 0) {
            parallel_for(edges.size(), workers, [&](WorkRange r) {
                std::vector<Vec2> scratch;
                for (std::size_t i = r.begin; i < r.end; ++i)
                    resample(edges[i], delta_world, &scratch);
            });
        }

        const DensityField rho =
            smooth_gaussian_approx(accumulate_edges(edges, g, m, t, workers), sigma, config.smoothing_passes, workers);

        std::vector<Partial> partials(workers);
        parallel_for(edges.size(), workers, [&](WorkRange r) {
            Partial& part = partials[r.worker];
            for (std::size_t i = r.begin; i < r.end; ++i) {
                SampledEdge& s = edges[i];
                const int layer = g.edges[s.edge_index].bin;
                const Layer& L = rho.layers[static_cast<std::size_t>(layer)];
                for (std::size_t k = 1; k + 1 < s.points.size(); ++k) {
                    const Vec2 before = t.to_grid(s.points[k]);
                    const AdvectResult moved = advect_point(before, rho, layer, metrics.bandwidth, config.epsilon,
                                                            config.min_step, config.advection);
                    ++part.interior;
                    if (!moved.moved)
                        continue;
                    const double d = distance(before, moved.point);
                    ++part.moved;
                    part.displacement += d;
                    part.max_displacement = std::max(part.max_displacement, d);
                    if (config.advection == AdvectionMode::fixed && density_at(L, moved.point) < density_at(L, before))
                        ++part.decreases;
                    s.points[k] = t.to_world(moved.point);
                }
                if (config.laplacian_passes > 0)
                    laplacian_smooth(s, config.laplacian_factor, config.laplacian_passes);
            }
        });

        std::size_t interior = 0;
        double displacement = 0.0;
        for (const Partial& p : partials) {
            interior += p.interior;
            metrics.moved_points += p.moved;
            metrics.density_decreases += p.decreases;
            displacement += p.displacement;
            metrics.max_displacement = std::max(metrics.max_displacement, p.max_displacement);
        }
        metrics.mean_displacement = interior > 0 ? displacement / static_cast<double>(interior) : 0.0;
        for (const auto& s : edges)
            metrics.samples += s.points.size();
        metrics.seconds = std::chrono::duration<double>(clock::now() - start).count();
        result.bundling_seconds += metrics.seconds;
        metrics.used_cells = used_cells(rho);
        result.iterations.push_back(metrics);

        if (hooks.on_iteration)
            hooks.on_iteration(IterationState{it, metrics.bandwidth, edges, &rho, &result.iterations.back()});
    }

    result.density =
        smooth_gaussian_approx(accumulate_edges(edges, g, m, t, workers), sigma, config.smoothing_passes, workers);
    return result;
}

/// Bundles with the bins already stored on the graph.
inline BundleResult bundle(const Graph& graph, const InteractionMatrix& m, const BundleConfig& config,
                           const BundleHooks& hooks = {})
{
    return bundle(graph, std::span<const int>{}, m, config, hooks);
}

} // namespace hbundle

#endif // HBUNDLE_BUNDLER_HPP
