#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "hbundle/graph_io.hpp"

using namespace hbundle;

namespace {

Graph load(const std::string& nodes, const std::string& edges, LoadOptions opts = {}, LoadStats* stats = nullptr)
{
    std::istringstream n(nodes);
    std::istringstream e(edges);
    return load_graph(n, e, opts, stats);
}

std::string load_error(const std::string& nodes, const std::string& edges)
{
    try {
        load(nodes, edges);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(LoadGraph, MinimalGraph)
{
    const Graph g = load("a 0 0\nb 1 0\n", "a b\n");
    ASSERT_EQ(g.nodes.size(), 2u);
    ASSERT_EQ(g.edges.size(), 1u);
    EXPECT_EQ(g.edges[0].weight, 1.0);
    EXPECT_EQ(g.edges[0].bin, 0);
    EXPECT_EQ(g.bin_count, 1);
    EXPECT_EQ(g.nodes[1].position, (Vec2{1, 0}));
}

TEST(LoadGraph, CommasCommentsWeightsAndBins)
{
    const Graph g = load("# nodes\na,0,0\nb, 2.5, -1e1\n\nc 3 3\n", "# edges\na,b,2.5,1\nb c 0.5 3\nc a\n");
    ASSERT_EQ(g.edges.size(), 3u);
    EXPECT_EQ(g.nodes[1].position, (Vec2{2.5, -10}));
    EXPECT_EQ(g.edges[0].weight, 2.5);
    EXPECT_EQ(g.edges[0].bin, 1);
    EXPECT_EQ(g.edges[1].bin, 3);
    EXPECT_EQ(g.bin_count, 4);
}

TEST(LoadGraph, UnknownNodeNamesLine)
{
    EXPECT_EQ(load_error("a 0 0\nb 1 0\n", "a c\n"), "unknown node 'c' at line 1");
}

TEST(LoadGraph, NonNumericCoordinateNamesLine)
{
    EXPECT_EQ(load_error("a 0 0\nb x 0\n", "a b\n"), "invalid coordinate 'x' at line 2");
}

TEST(LoadGraph, DuplicateNodeId)
{
    EXPECT_EQ(load_error("a 0 0\na 1 0\n", ""), "duplicate node id 'a' at line 2");
}

TEST(LoadGraph, NegativeWeightRejected)
{
    EXPECT_EQ(load_error("a 0 0\nb 1 0\n", "a b -1\n"), "invalid weight '-1' at line 1");
}

TEST(LoadGraph, SelfLoopDroppedWithWarning)
{
    LoadStats stats;
    const Graph g = load("a 0 0\nb 1 0\n", "a a\n", {}, &stats);
    EXPECT_EQ(g.edges.size(), 0u);
    EXPECT_EQ(stats.dropped_self_loops, 1u);
    EXPECT_EQ(stats.warnings(), 1u);
}

TEST(LoadGraph, SelfLoopRejectedWhenNotDropping)
{
    LoadOptions opts;
    opts.drop_self_loops = false;
    EXPECT_THROW(load("a 0 0\n", "a a\n", opts), Error);
}

TEST(LoadGraph, ZeroLengthEdgeDropped)
{
    LoadStats stats;
    const Graph g = load("a 1 1\nb 1 1\nc 2 2\n", "a b\na c\n", {}, &stats);
    EXPECT_EQ(g.edges.size(), 1u);
    EXPECT_EQ(stats.dropped_zero_length, 1u);
}

TEST(LoadGraph, DuplicateEdgesRetained)
{
    const Graph g = load("a 0 0\nb 1 0\n", "a b\na b\n");
    EXPECT_EQ(g.edges.size(), 2u);
}

TEST(LoadGraph, RandomWellFormedFilesParse)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 60);
        const int m = static_cast<int>(rng() % 200);
        std::uniform_real_distribution<double> coord(-1e4, 1e4);
        std::ostringstream nodes;
        for (int i = 0; i < n; ++i)
            nodes << "node_" << i << (rng() % 2 ? ", " : " ") << coord(rng) << ' ' << coord(rng) << '\n';
        std::ostringstream edges;
        int written = 0;
        for (int i = 0; i < m; ++i) {
            const int a = static_cast<int>(rng() % n);
            int b = static_cast<int>(rng() % n);
            if (a == b)
                b = (b + 1) % n;
            edges << "node_" << a << ' ' << "node_" << b;
            if (rng() % 2)
                edges << ' ' << (rng() % 100) / 10.0 << ' ' << rng() % 5;
            edges << '\n';
            if (rng() % 10 == 0)
                edges << "# comment\n";
            ++written;
        }
        const Graph g = load(nodes.str(), edges.str());
        EXPECT_EQ(g.nodes.size(), static_cast<std::size_t>(n));
        EXPECT_EQ(g.edges.size(), static_cast<std::size_t>(written));
    }
}

namespace {

BundleResult straight_result()
{
    BundleResult r;
    r.graph.nodes = {{"a", {0, 0}}, {"b", {3, 4}}};
    r.graph.edges = {{0, 1, 2.0, 0}};
    r.edges.push_back({0, {{0, 0}, {1.5, 2}, {3, 4}}});
    return r;
}

} // namespace

TEST(ExportPolylines, SingleStraightEdge)
{
    std::ostringstream out;
    export_polylines(straight_result(), out);
    std::istringstream in(out.str());
    const auto records = import_polylines(in);
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].edge_index, 0u);
    EXPECT_EQ(records[0].weight, 2.0);
    ASSERT_EQ(records[0].points.size(), 3u);
    EXPECT_EQ(records[0].points.front(), (Vec2{0, 0}));
    EXPECT_EQ(records[0].points.back(), (Vec2{3, 4}));
    EXPECT_NE(out.str().find("0 0 2 3 0 0 1.5 2 3 4\n"), std::string::npos);
}

TEST(ExportPolylines, EmptyResultWritesHeaderOnly)
{
    BundleResult r;
    std::ostringstream out;
    export_polylines(r, out);
    EXPECT_EQ(out.str(), std::string(polyline_header) + "\n");
    std::istringstream in(out.str());
    EXPECT_TRUE(import_polylines(in).empty());
}

TEST(ExportPolylines, RoundTripProperty)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> coord(-1e3, 1e3);
    BundleResult r;
    r.graph.nodes = {{"a", {0, 0}}, {"b", {1, 1}}};
    for (int i = 0; i < 100; ++i) {
        r.graph.edges.push_back({0, 1, 1.0 + i % 3, i % 4});
        SampledEdge s{static_cast<std::size_t>(i), {}};
        const int n = 2 + static_cast<int>(rng() % 40);
        for (int k = 0; k < n; ++k)
            s.points.push_back({coord(rng), coord(rng)});
        r.edges.push_back(std::move(s));
    }
    r.graph.bin_count = 4;

    std::ostringstream first;
    export_polylines(r, first);
    std::istringstream in(first.str());
    const auto records = import_polylines(in);
    ASSERT_EQ(records.size(), r.edges.size());

    BundleResult again = r;
    for (std::size_t i = 0; i < records.size(); ++i) {
        EXPECT_EQ(records[i].edge_index, r.edges[i].edge_index);
        EXPECT_EQ(records[i].bin, r.graph.edges[i].bin);
        ASSERT_EQ(records[i].points.size(), r.edges[i].points.size());
        for (std::size_t k = 0; k < records[i].points.size(); ++k) {
            const Vec2 a = records[i].points[k];
            const Vec2 b = r.edges[i].points[k];
            // 9 significant digits
            EXPECT_LE(std::abs(a.x - b.x), 1e-8 * std::max(1.0, std::abs(b.x)));
            EXPECT_LE(std::abs(a.y - b.y), 1e-8 * std::max(1.0, std::abs(b.y)));
        }
        again.edges[i].points = records[i].points;
    }
    std::ostringstream second;
    export_polylines(again, second);
    EXPECT_EQ(first.str(), second.str());
}

TEST(ImportPolylines, RejectsMalformedRecords)
{
    std::istringstream bad("0 0 1 3 0 0 1 1\n");
    EXPECT_THROW(import_polylines(bad), Error);
}
