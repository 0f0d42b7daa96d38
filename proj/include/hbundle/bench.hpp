#ifndef HBUNDLE_BENCH_HPP
#define HBUNDLE_BENCH_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hbundle/bundler.hpp"
#include "hbundle/core.hpp"

namespace hbundle {

struct RandomGraphSpec
{
    std::size_t edges = 1000;
    double samples_per_edge = 24.0; ///< target mean of the initial sample count
    int bins = 1;
    std::uint64_t seed = 1;
    double world_size = 1000.0;
};

/// Uniformly scattered nodes; each edge starts at a random node and ends at a new
/// node placed in a random direction, with a length drawn so that the initial
/// sampling under `config` produces about `samples_per_edge` points per edge.
inline Graph random_graph(const RandomGraphSpec& spec, const BundleConfig& config)
{
    std::mt19937_64 rng(spec.seed);
    std::mt19937_64 bin_rng(spec.seed ^ 0x5bd1e995ULL); // separate stream: geometry does not depend on bins
    std::uniform_real_distribution<double> coord(0.0, spec.world_size);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> spread(0.5, 1.5);
    std::uniform_int_distribution<int> bin(0, std::max(spec.bins, 1) - 1);

    Graph g;
    g.bin_count = std::max(spec.bins, 1);
    auto add_node = [&](Vec2 p) {
        g.nodes.push_back({"n" + std::to_string(g.nodes.size()), p});
        return g.nodes.size() - 1;
    };
    // Corners pin the bounding box, hence the cell size.
    add_node({0.0, 0.0});
    add_node({spec.world_size, 0.0});
    add_node({0.0, spec.world_size});
    add_node({spec.world_size, spec.world_size});
    const std::size_t base = std::max<std::size_t>(2, spec.edges / 4);
    for (std::size_t i = 0; i < base; ++i)
        add_node({coord(rng), coord(rng)});
    const std::size_t base_end = g.nodes.size();
    std::uniform_int_distribution<std::size_t> pick(0, base_end - 1);

    const double cell = spec.world_size / (config.grid_size - 2.0 * config.padding_cells());
    const double mean_length = std::max(spec.samples_per_edge - 1.5, 0.5) * config.delta * cell;

    g.edges.reserve(spec.edges);
    g.nodes.reserve(base_end + spec.edges);
    for (std::size_t i = 0; i < spec.edges; ++i) {
        const std::size_t s = pick(rng);
        const Vec2 from = g.nodes[s].position;
        const double length = mean_length * spread(rng);
        Vec2 to = from;
        for (int attempt = 0; attempt < 16; ++attempt) {
            const double a = angle(rng);
            to = from + Vec2{std::cos(a), std::sin(a)} * length;
            if (to.x >= 0.0 && to.y >= 0.0 && to.x <= spec.world_size && to.y <= spec.world_size)
                break;
        }
        to.x = std::clamp(to.x, 0.0, spec.world_size);
        to.y = std::clamp(to.y, 0.0, spec.world_size);
        if (to == from)
            to.x = from.x < spec.world_size * 0.5 ? from.x + length : from.x - length;
        const std::size_t t = add_node(to);
        g.edges.push_back({s, t, 1.0, bin(bin_rng)});
    }
    return g;
}

struct BenchRow
{
    std::size_t edges = 0;
    std::size_t samples = 0;
    int bins = 1;
    double seconds = 0.0;
};

/// Bundles one random graph per (size, bin count) pair and reports the time spent
/// in the iteration loop only.
inline std::vector<BenchRow> bench(const std::vector<std::size_t>& sizes, const std::vector<int>& bin_counts,
                                   std::uint64_t seed, const BundleConfig& config, double samples_per_edge = 24.0)
{
    std::vector<BenchRow> rows;
    for (std::size_t size : sizes) {
        for (int b : bin_counts) {
            RandomGraphSpec spec;
            spec.edges = size;
            spec.samples_per_edge = samples_per_edge;
            spec.bins = b;
            spec.seed = seed;
            const Graph g = random_graph(spec, config);
            const BundleResult r = bundle(g, InteractionMatrix::repulsion(b, config.alpha), config);
            rows.push_back({size, r.initial_samples, b, r.bundling_seconds});
        }
    }
    return rows;
}

} // namespace hbundle

#endif // HBUNDLE_BENCH_HPP
