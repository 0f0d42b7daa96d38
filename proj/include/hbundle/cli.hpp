#ifndef HBUNDLE_CLI_HPP
#define HBUNDLE_CLI_HPP

#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hbundle/bench.hpp"
#include "hbundle/binning.hpp"
#include "hbundle/bundler.hpp"
#include "hbundle/graph_io.hpp"
#include "hbundle/raster.hpp"
#include "hbundle/render.hpp"

namespace hbundle {

struct RunSpec
{
    std::string nodes_path;
    std::string edges_path;
    std::string criterion = "none";
    std::string bins;                 ///< "auto", a number, or empty for the criterion default
    int kmin = 4;
    int kmax = 16;
    int restarts = 100;
    std::optional<double> offset;     ///< directed offset fraction; default depends on criterion
    BundleConfig config;

    std::string svg_path;
    std::string png_path;
    std::string polylines_path;
    std::string metrics_path;
    std::string density_path;         ///< graymap of layer 0 of the final field
    int png_size = 1600;              ///< pixels along the dominant axis
    std::string colors;               ///< sequential | hue | nominal | flow; default from criterion
    RenderOptions render;

    bool bench = false;
    std::vector<std::size_t> bench_sizes{10000, 20000, 40000};
    std::vector<int> bench_bins{1, 4, 16};
    double bench_samples_per_edge = 24.0;
};

/// Parses command-line flags. Returns an exit code when the program should stop
/// (help requested: 0, invalid flags: 2).
inline std::optional<int> parse_args(int argc, const char* const* argv, RunSpec& spec, std::ostream& out,
                                     std::ostream& err)
{
    CLI::App app{"Density-histogram edge bundling for large graphs", "hbundle"};
    double sigma = 0.0;
    double hmax = 0.0;
    double offset = 0.0;
    double opacity = 0.0;

    app.add_option("--nodes", spec.nodes_path, "Node file: 'id x y' per line");
    app.add_option("--edges", spec.edges_path, "Edge file: 'source target [weight] [bin]' per line");
    app.add_option("--criterion", spec.criterion, "Binning criterion")
        ->check(CLI::IsMember({"none", "orientation", "origin", "destination", "od", "length", "file"}));
    app.add_option("--bins", spec.bins, "Bin count, or 'auto' to pick one by the Davies-Bouldin index");
    app.add_option("--kmin", spec.kmin, "Smallest bin count tried by --bins auto")->check(CLI::Range(2, 1024));
    app.add_option("--kmax", spec.kmax, "Largest bin count tried by --bins auto")->check(CLI::Range(2, 1024));
    app.add_option("--restarts", spec.restarts, "K-means restarts per bin count")->check(CLI::PositiveNumber);
    app.add_option("--alpha", spec.config.alpha, "Repulsion between bins")->check(CLI::NonNegativeNumber);
    auto* sigma_opt = app.add_option("--sigma", sigma, "Smoothing sigma in grid cells")->check(CLI::PositiveNumber);
    auto* hmax_opt = app.add_option("--hmax", hmax, "Initial advection step in grid cells")->check(CLI::NonNegativeNumber);
    app.add_option("--lambda", spec.config.lambda, "Bandwidth decay per iteration")->check(CLI::Range(0.0, 1.0));
    app.add_option("--iterations", spec.config.iterations, "Bundling iterations")->check(CLI::NonNegativeNumber);
    app.add_option("--delta", spec.config.delta, "Sampling step in grid cells")->check(CLI::PositiveNumber);
    app.add_option("--grid", spec.config.grid_size, "Histogram size along the dominant axis")->check(CLI::Range(8, 1 << 15));
    app.add_option("--smoothing-passes", spec.config.smoothing_passes, "Box filter passes")->check(CLI::Range(1, 16));
    app.add_option("--laplacian", spec.config.laplacian_factor, "Laplacian smoothing factor")->check(CLI::Range(0.0, 1.0));
    auto* offset_opt = app.add_option("--offset", offset, "Directed offset as a fraction of the drawing size")
                           ->check(CLI::Range(0.0, 0.1));
    app.add_option("--workers", spec.config.workers, "Worker threads")->check(CLI::Range(1, 256));
    app.add_option("--seed", spec.config.random_seed, "Random seed");
    app.add_option("--svg", spec.svg_path, "Write an SVG drawing");
    app.add_option("--png", spec.png_path, "Write a PNG drawing");
    app.add_option("--png-size", spec.png_size, "PNG size along the dominant axis")->check(CLI::Range(1, 1 << 15));
    app.add_option("--polylines", spec.polylines_path, "Write bundled polylines");
    app.add_option("--metrics", spec.metrics_path, "Write per-iteration metrics as CSV");
    app.add_option("--density", spec.density_path, "Write the final density of layer 0 as a PGM image");
    app.add_option("--colors", spec.colors, "Colour scheme")
        ->check(CLI::IsMember({"sequential", "hue", "nominal", "flow"}));
    auto* opacity_opt = app.add_option("--opacity", opacity, "Edge opacity")->check(CLI::Range(0.0, 1.0));
    app.add_option("--width-min", spec.render.width_min, "Minimum stroke width in grid cells")->check(CLI::NonNegativeNumber);
    app.add_option("--width-max", spec.render.width_max, "Maximum stroke width in grid cells")->check(CLI::NonNegativeNumber);
    app.add_flag("--log-width", spec.render.log_scale, "Logarithmic density-to-width mapping");
    app.add_flag("--bench", spec.bench, "Run the scalability benchmark on random graphs");
    app.add_option("--bench-sizes", spec.bench_sizes, "Benchmark edge counts")->delimiter(',');
    app.add_option("--bench-bins", spec.bench_bins, "Benchmark bin counts")->delimiter(',');
    app.add_option("--bench-samples", spec.bench_samples_per_edge, "Mean samples per benchmark edge")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    if (*sigma_opt)
        spec.config.sigma = sigma;
    if (*hmax_opt)
        spec.config.h_max = hmax;
    if (*offset_opt)
        spec.offset = offset;
    if (*opacity_opt)
        spec.render.alpha = opacity;
    if (spec.kmax < spec.kmin) {
        err << "--kmax must not be smaller than --kmin\n";
        return 2;
    }
    if (spec.render.width_min > spec.render.width_max) {
        err << "--width-min must not exceed --width-max\n";
        return 2;
    }
    if (!spec.bench && (spec.nodes_path.empty() || spec.edges_path.empty())) {
        err << "--nodes and --edges are required\n";
        return 2;
    }
    return std::nullopt;
}

namespace detail {

inline std::ofstream open_output(const std::string& path, bool binary = false)
{
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out)
        throw Error("cannot open '" + path + "' for writing");
    return out;
}

inline ColorScheme scheme_for(const std::string& name, Criterion c)
{
    ColorScheme s;
    std::string chosen = name;
    if (chosen.empty()) {
        switch (c) {
        case Criterion::orientation: chosen = "hue"; break;
        case Criterion::length: chosen = "sequential"; break;
        default: chosen = "nominal"; break;
        }
    }
    if (chosen == "sequential")
        s.kind = ColorScheme::Kind::sequential;
    else if (chosen == "hue")
        s.kind = ColorScheme::Kind::modal_hue;
    else if (chosen == "flow")
        s.kind = ColorScheme::Kind::flow_blue_red;
    else
        s.kind = ColorScheme::Kind::nominal;
    return s;
}

inline std::string fixed(double v, int digits = 3)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline void write_metrics(const BundleResult& r, std::ostream& out)
{
    out << "iteration,bandwidth,samples,moved_points,mean_displacement,used_cells,seconds\n";
    std::size_t moved = 0;
    for (const auto& m : r.iterations) {
        moved += m.moved_points;
        out << m.iteration << ',' << fixed(m.bandwidth, 6) << ',' << m.samples << ',' << m.moved_points << ','
            << fixed(m.mean_displacement, 6) << ',' << m.used_cells << ',' << fixed(m.seconds, 6) << '\n';
    }
    std::size_t final_samples = 0;
    for (const auto& s : r.edges)
        final_samples += s.points.size();
    out << "summary," << (r.iterations.empty() ? "" : fixed(r.iterations.back().bandwidth, 6)) << ','
        << final_samples << ',' << moved << ",," << used_cells(r.density) << ',' << fixed(r.bundling_seconds, 6)
        << '\n';
}

} // namespace detail

/// Load, bin, bundle and write the requested outputs. Returns the process exit code.
inline int run(const RunSpec& spec, std::ostream& out, std::ostream& err)
{
    using clock = std::chrono::steady_clock;
    auto seconds_since = [](clock::time_point t) { return std::chrono::duration<double>(clock::now() - t).count(); };

    try {
        for (const auto& w : spec.config.validate())
            err << "warning: " << w << '\n';

        if (spec.bench) {
            const auto rows = bench(spec.bench_sizes, spec.bench_bins, spec.config.random_seed, spec.config,
                                    spec.bench_samples_per_edge);
            std::ostringstream table;
            table << "edges,samples,bins,seconds\n";
            for (const auto& r : rows)
                table << r.edges << ',' << r.samples << ',' << r.bins << ',' << detail::fixed(r.seconds, 4) << '\n';
            out << table.str();
            if (!spec.metrics_path.empty()) {
                auto f = detail::open_output(spec.metrics_path);
                f << table.str();
            }
            return 0;
        }

        const auto read_start = clock::now();
        std::ifstream nodes(spec.nodes_path);
        if (!nodes)
            throw Error("cannot open '" + spec.nodes_path + "'");
        std::ifstream edges(spec.edges_path);
        if (!edges)
            throw Error("cannot open '" + spec.edges_path + "'");
        LoadStats stats;
        Graph graph = load_graph(nodes, edges, {}, &stats);
        const double read_seconds = seconds_since(read_start);
        if (stats.dropped_self_loops > 0)
            err << "warning: dropped " << stats.dropped_self_loops << " self-loop(s)\n";
        if (stats.dropped_zero_length > 0)
            err << "warning: dropped " << stats.dropped_zero_length << " zero-length edge(s)\n";
        if (graph.edges.empty())
            err << "warning: graph has no edges\n";

        const auto bin_start = clock::now();
        const Criterion criterion = parse_criterion(spec.criterion);
        std::vector<int> bins(graph.edges.size(), 0);
        int bin_count = 1;
        switch (criterion) {
        case Criterion::none: break;
        case Criterion::file:
            for (std::size_t i = 0; i < graph.edges.size(); ++i)
                bins[i] = graph.edges[i].bin;
            bin_count = graph.bin_count;
            break;
        case Criterion::orientation: {
            const int slices = spec.bins.empty() || spec.bins == "auto" ? 4 : std::stoi(spec.bins);
            bins = bin_by_orientation(graph, slices);
            bin_count = slices;
            break;
        }
        default: {
            const FeatureMatrix f = edge_features(graph, criterion);
            if (spec.bins.empty() || spec.bins == "auto") {
                BinSelection sel = select_bins(f, spec.kmin, spec.kmax, spec.restarts, spec.config.random_seed,
                                               spec.config.workers);
                bins = std::move(sel.bins);
                bin_count = sel.bin_count;
            } else {
                Clustering c = kmeans(f, std::stoi(spec.bins), spec.restarts, spec.config.random_seed,
                                      spec.config.workers);
                bins = std::move(c.assignment);
                bin_count = c.k;
            }
            if (criterion == Criterion::length)
                order_bins_by_feature(bins, bin_count, f);
            break;
        }
        }
        const double bin_seconds = seconds_since(bin_start);
        out << "criterion " << criterion_name(criterion) << ": " << bin_count << " bin(s)\n";

        BundleConfig config = spec.config;
        config.directed_offset_fraction = spec.offset.value_or(is_directional(criterion) ? 0.002 : 0.0);
        const BundleResult result = bundle(graph, bins, InteractionMatrix::repulsion(bin_count, config.alpha), config);

        const auto render_start = clock::now();
        const ColorScheme scheme = detail::scheme_for(spec.colors, criterion);
        if (!spec.polylines_path.empty()) {
            auto f = detail::open_output(spec.polylines_path);
            export_polylines(result, f);
        }
        if (!spec.svg_path.empty()) {
            auto f = detail::open_output(spec.svg_path);
            f << render_svg(result, scheme, spec.render);
            if (!f)
                throw Error("failed to write '" + spec.svg_path + "'");
        }
        if (!spec.png_path.empty()) {
            const GridTransform& t = result.density.transform;
            const double s = static_cast<double>(spec.png_size) / t.dominant();
            const int w = std::max(1, static_cast<int>(std::lround(t.width * s)));
            const int h = std::max(1, static_cast<int>(std::lround(t.height * s)));
            write_png(render_png(result, scheme, spec.render, w, h), spec.png_path);
        }
        if (!spec.density_path.empty()) {
            auto f = detail::open_output(spec.density_path, true);
            write_pgm(result.density.layers.front(), f);
        }
        if (!spec.metrics_path.empty()) {
            auto f = detail::open_output(spec.metrics_path);
            detail::write_metrics(result, f);
        }
        const double render_seconds = seconds_since(render_start);

        out << "edges " << graph.edges.size() << ", samples " << result.initial_samples << ", iterations "
            << result.iterations.size() << '\n';
        out << "bundling " << detail::fixed(result.bundling_seconds) << " s (read " << detail::fixed(read_seconds)
            << " s, binning " << detail::fixed(bin_seconds) << " s, output " << detail::fixed(render_seconds)
            << " s)\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace hbundle

#endif // HBUNDLE_CLI_HPP
