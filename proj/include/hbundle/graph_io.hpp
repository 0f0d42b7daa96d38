#ifndef HBUNDLE_GRAPH_IO_HPP
#define HBUNDLE_GRAPH_IO_HPP

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hbundle/core.hpp"

namespace hbundle {

struct IterationMetrics
{
    int iteration = 0;
    double bandwidth = 0.0;          ///< h_i in grid cells
    std::size_t samples = 0;         ///< sample points after resampling
    std::size_t moved_points = 0;
    std::size_t density_decreases = 0; ///< accepted moves that lowered density (fixed-step mode only)
    double mean_displacement = 0.0;  ///< grid cells, over all interior points
    double max_displacement = 0.0;
    std::size_t used_cells = 0;      ///< of the field that drove this iteration
    double seconds = 0.0;
};

struct BundleResult
{
    Graph graph;
    std::vector<SampledEdge> edges;
    DensityField density; ///< smoothed field of the final polylines
    std::vector<IterationMetrics> iterations;
    std::size_t initial_samples = 0;
    double bundling_seconds = 0.0;
};

struct LoadOptions
{
    bool drop_self_loops = true;
};

struct LoadStats
{
    std::size_t dropped_self_loops = 0;
    std::size_t dropped_zero_length = 0;
    std::size_t warnings() const { return dropped_self_loops + dropped_zero_length; }
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; };
    while (i < line.size()) {
        while (i < line.size() && is_sep(line[i]))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && !is_sep(line[i]))
            ++i;
        if (i > start)
            fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

inline bool parse_double(std::string_view s, double& out)
{
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

template <typename Int>
bool parse_int(std::string_view s, Int& out)
{
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

/// Calls fn(fields, line_number) for each non-empty, non-comment line.
template <typename F>
void for_each_record(std::istream& in, F&& fn)
{
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto fields = split_fields(line);
        if (fields.empty() || fields.front().front() == '#')
            continue;
        fn(fields, number);
    }
}

} // namespace detail

/// Reads `id x y` node lines and `source target [weight] [bin]` edge lines.
/// Fields are separated by whitespace or commas; lines starting with '#' are comments.
inline Graph load_graph(std::istream& node_source, std::istream& edge_source, const LoadOptions& options = {},
                        LoadStats* stats = nullptr)
{
    Graph g;
    LoadStats local;
    std::unordered_map<std::string, std::size_t> index;

    detail::for_each_record(node_source, [&](const auto& f, std::size_t line) {
        if (f.size() < 3)
            throw Error("expected 'id x y'" + detail::at_line(line));
        Node n;
        n.id = std::string(f[0]);
        if (!detail::parse_double(f[1], n.position.x))
            throw Error("invalid coordinate '" + std::string(f[1]) + "'" + detail::at_line(line));
        if (!detail::parse_double(f[2], n.position.y))
            throw Error("invalid coordinate '" + std::string(f[2]) + "'" + detail::at_line(line));
        if (!index.emplace(n.id, g.nodes.size()).second)
            throw Error("duplicate node id '" + n.id + "'" + detail::at_line(line));
        g.nodes.push_back(std::move(n));
    });

    int max_bin = 0;
    detail::for_each_record(edge_source, [&](const auto& f, std::size_t line) {
        if (f.size() < 2)
            throw Error("expected 'source target [weight] [bin]'" + detail::at_line(line));
        Edge e;
        for (int k = 0; k < 2; ++k) {
            const auto it = index.find(std::string(f[static_cast<std::size_t>(k)]));
            if (it == index.end())
                throw Error("unknown node '" + std::string(f[static_cast<std::size_t>(k)]) + "'" +
                            detail::at_line(line));
            (k == 0 ? e.source : e.target) = it->second;
        }
        if (f.size() > 2 && (!detail::parse_double(f[2], e.weight) || e.weight < 0.0))
            throw Error("invalid weight '" + std::string(f[2]) + "'" + detail::at_line(line));
        if (f.size() > 3 && (!detail::parse_int(f[3], e.bin) || e.bin < 0))
            throw Error("invalid bin '" + std::string(f[3]) + "'" + detail::at_line(line));

        if (e.source == e.target) {
            if (!options.drop_self_loops)
                throw Error("self-loop" + detail::at_line(line));
            ++local.dropped_self_loops;
            return;
        }
        if (g.nodes[e.source].position == g.nodes[e.target].position) {
            ++local.dropped_zero_length;
            return;
        }
        max_bin = std::max(max_bin, e.bin);
        g.edges.push_back(e);
    });

    g.bin_count = max_bin + 1;
    g.validate();
    if (stats)
        *stats = local;
    return g;
}

inline std::string format_coordinate(double v)
{
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

inline constexpr std::string_view polyline_header = "# edge_index bin weight n x1 y1 ... xn yn";

/// One line per edge: `edge_index bin weight n x1 y1 ... xn yn`, 9 significant digits.
inline void export_polylines(const BundleResult& result, std::ostream& sink)
{
    sink << polyline_header << '\n';
    std::string line;
    for (const auto& s : result.edges) {
        const Edge& e = result.graph.edges[s.edge_index];
        line.clear();
        line += std::to_string(s.edge_index);
        line += ' ';
        line += std::to_string(e.bin);
        line += ' ';
        line += format_coordinate(e.weight);
        line += ' ';
        line += std::to_string(s.points.size());
        for (const Vec2& p : s.points) {
            line += ' ';
            line += format_coordinate(p.x);
            line += ' ';
            line += format_coordinate(p.y);
        }
        line += '\n';
        sink << line;
    }
    sink.flush();
    if (!sink)
        throw Error("failed to write polylines");
}

struct PolylineRecord
{
    std::size_t edge_index = 0;
    int bin = 0;
    double weight = 1.0;
    std::vector<Vec2> points;
};

inline std::vector<PolylineRecord> import_polylines(std::istream& source)
{
    std::vector<PolylineRecord> records;
    detail::for_each_record(source, [&](const auto& f, std::size_t line) {
        PolylineRecord r;
        std::size_t n = 0;
        if (f.size() < 4 || !detail::parse_int(f[0], r.edge_index) || !detail::parse_int(f[1], r.bin) ||
            !detail::parse_double(f[2], r.weight) || !detail::parse_int(f[3], n))
            throw Error("malformed polyline record" + detail::at_line(line));
        if (f.size() != 4 + 2 * n)
            throw Error("point count mismatch" + detail::at_line(line));
        r.points.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            if (!detail::parse_double(f[4 + 2 * i], r.points[i].x) ||
                !detail::parse_double(f[5 + 2 * i], r.points[i].y))
                throw Error("invalid coordinate" + detail::at_line(line));
        records.push_back(std::move(r));
    });
    return records;
}

} // namespace hbundle

#endif // HBUNDLE_GRAPH_IO_HPP
