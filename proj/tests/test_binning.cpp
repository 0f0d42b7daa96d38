#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hbundle/binning.hpp"

using namespace hbundle;

namespace {

Graph star(const std::vector<double>& degrees, double length = 10.0, Vec2 centre = {0, 0})
{
    Graph g;
    g.nodes.push_back({"c", centre});
    for (double d : degrees) {
        const double r = d * std::numbers::pi / 180.0;
        g.nodes.push_back({"n" + std::to_string(g.nodes.size()),
                           centre + Vec2{length * std::cos(r), length * std::sin(r)}});
        g.edges.push_back({0, g.nodes.size() - 1, 1.0, 0});
    }
    return g;
}

FeatureMatrix points(const std::vector<Vec2>& ps)
{
    FeatureMatrix f(ps.size(), 2);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        f.row(i)[0] = ps[i].x;
        f.row(i)[1] = ps[i].y;
    }
    return f;
}

// Six isotropic blobs in 4D with radius 1 and centres at least 20 apart.
FeatureMatrix six_blobs(std::mt19937_64& rng, std::size_t per_blob = 40)
{
    std::normal_distribution<double> noise(0.0, 1.0 / 3.0);
    const double centres[6][4] = {{0, 0, 0, 0},   {40, 0, 0, 0},  {0, 40, 0, 0},
                                  {0, 0, 40, 0},  {0, 0, 0, 40},  {40, 40, 40, 40}};
    FeatureMatrix f(6 * per_blob, 4);
    for (std::size_t b = 0; b < 6; ++b)
        for (std::size_t i = 0; i < per_blob; ++i)
            for (std::size_t c = 0; c < 4; ++c)
                f.row(b * per_blob + i)[c] = centres[b][c] + noise(rng);
    return f;
}

double cyclic_distance(double a, double b)
{
    const double d = std::fmod(std::abs(a - b), 360.0);
    return std::min(d, 360.0 - d);
}

} // namespace

TEST(ParseCriterion, NamesRoundTrip)
{
    for (auto name : {"none", "orientation", "origin", "destination", "od", "length", "file"})
        EXPECT_EQ(criterion_name(parse_criterion(name)), name);
    EXPECT_THROW(parse_criterion("colour"), Error);
    EXPECT_TRUE(is_directional(Criterion::orientation));
    EXPECT_TRUE(is_directional(Criterion::origin_destination));
    EXPECT_FALSE(is_directional(Criterion::length));
}

TEST(EdgeFeatures, ShapesAndValues)
{
    Graph g;
    g.nodes = {{"a", {1, 2}}, {"b", {4, 6}}};
    g.edges = {{0, 1, 1.0, 0}};
    const auto od = edge_features(g, Criterion::origin_destination);
    ASSERT_EQ(od.cols, 4u);
    EXPECT_EQ(od.row(0)[0], 1);
    EXPECT_EQ(od.row(0)[3], 6);
    const auto len = edge_features(g, Criterion::length);
    ASSERT_EQ(len.cols, 1u);
    EXPECT_DOUBLE_EQ(len.row(0)[0], 5.0);
    EXPECT_EQ(edge_features(g, Criterion::destination).row(0)[0], 4);
    EXPECT_THROW(edge_features(g, Criterion::orientation), Error);
}

TEST(BinByOrientation, SliceCentres)
{
    const auto bins = bin_by_orientation(star({0, 100, -91, 180, 44, 46}), 4);
    EXPECT_EQ(bins, (std::vector<int>{0, 1, 3, 2, 0, 1}));
}

TEST(BinByOrientation, EveryDegreeMapsToNearestCentre)
{
    for (int slices : {2, 3, 4, 6, 8, 12}) {
        std::vector<double> degrees;
        for (int d = -180; d < 180; ++d)
            degrees.push_back(d + 0.3);
        const auto bins = bin_by_orientation(star(degrees), slices);
        const double width = 360.0 / slices;
        for (std::size_t i = 0; i < degrees.size(); ++i) {
            int nearest = 0;
            for (int s = 1; s < slices; ++s)
                if (cyclic_distance(degrees[i], s * width) < cyclic_distance(degrees[i], nearest * width))
                    nearest = s;
            EXPECT_EQ(bins[i], nearest) << degrees[i] << " deg, " << slices << " slices";
        }
    }
}

TEST(BinByOrientation, ScaleInvariant)
{
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> coord(-100, 100);
    Graph g;
    for (int i = 0; i < 200; ++i)
        g.nodes.push_back({std::to_string(i), {coord(rng), coord(rng)}});
    for (std::size_t i = 0; i + 1 < g.nodes.size(); ++i)
        g.edges.push_back({i, i + 1, 1.0, 0});
    Graph scaled = g;
    for (auto& n : scaled.nodes)
        n.position = n.position * 37.5;
    EXPECT_EQ(bin_by_orientation(g, 8), bin_by_orientation(scaled, 8));
}

TEST(KMeans, SeparatesTwoClouds)
{
    std::mt19937_64 rng(67);
    std::normal_distribution<double> noise(0, 0.2);
    std::vector<Vec2> ps;
    for (int i = 0; i < 50; ++i)
        ps.push_back({noise(rng), noise(rng)});
    for (int i = 0; i < 50; ++i)
        ps.push_back({10 + noise(rng), 10 + noise(rng)});
    const auto f = points(ps);
    const auto c = kmeans(f, 2, 10, 1);
    for (int i = 1; i < 50; ++i) {
        EXPECT_EQ(c.assignment[static_cast<std::size_t>(i)], c.assignment[0]);
        EXPECT_EQ(c.assignment[static_cast<std::size_t>(50 + i)], c.assignment[50]);
    }
    EXPECT_NE(c.assignment[0], c.assignment[50]);
    for (int a = 0; a < 2; ++a) {
        Vec2 mean{};
        int n = 0;
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (c.assignment[i] == a) {
                mean = mean + ps[i];
                ++n;
            }
        mean = mean * (1.0 / n);
        EXPECT_NEAR(c.centroids[static_cast<std::size_t>(a) * 2], mean.x, 1e-6);
        EXPECT_NEAR(c.centroids[static_cast<std::size_t>(a) * 2 + 1], mean.y, 1e-6);
    }
}

TEST(KMeans, KEqualsDistinctPointsGivesZeroInertia)
{
    const auto f = points({{0, 0}, {1, 0}, {0, 1}, {1, 0}, {5, 5}});
    EXPECT_EQ(distinct_rows(f), 4u);
    const auto c = kmeans(f, 4, 5, 3);
    EXPECT_EQ(c.inertia, 0.0);
    EXPECT_THROW(kmeans(f, 5, 5, 3), Error);
}

TEST(KMeans, BestOfRestartsNoWorseThanFirstRestart)
{
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> coord(0, 100);
    std::vector<Vec2> ps;
    for (int i = 0; i < 200; ++i)
        ps.push_back({coord(rng), coord(rng)});
    const auto f = points(ps);
    const std::uint64_t seed = 99;
    const auto best = kmeans(f, 3, 100, seed);
    const auto first = kmeans(f, 3, 1, seed);
    EXPECT_LE(best.inertia, first.inertia);
    for (unsigned workers : {2u, 4u})
        EXPECT_EQ(kmeans(f, 3, 100, seed, workers).assignment, best.assignment);
}

TEST(KMeans, InertiaNonIncreasingAcrossIterations)
{
    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> coord(-50, 50);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Vec2> ps;
        for (int i = 0; i < 150; ++i)
            ps.push_back({coord(rng), coord(rng)});
        const auto f = points(ps);
        std::vector<double> history;
        const auto c = kmeans_single(f, 2 + trial % 9, rng(), 100, &history);
        for (std::size_t i = 1; i < history.size(); ++i)
            EXPECT_LE(history[i], history[i - 1] * (1 + 1e-12));
        for (int a : c.assignment)
            EXPECT_LT(a, c.k);
    }
}

TEST(KMeans, CentroidsAreMeansAtConvergence)
{
    std::mt19937_64 rng(79);
    std::uniform_real_distribution<double> coord(0, 10);
    std::vector<Vec2> ps;
    for (int i = 0; i < 300; ++i)
        ps.push_back({coord(rng), coord(rng)});
    const auto f = points(ps);
    const auto c = kmeans(f, 5, 20, 7);
    for (int a = 0; a < 5; ++a) {
        Vec2 sum{};
        int n = 0;
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (c.assignment[i] == a) {
                sum = sum + ps[i];
                ++n;
            }
        ASSERT_GT(n, 0);
        const Vec2 mean = sum * (1.0 / n);
        EXPECT_NEAR(c.centroids[static_cast<std::size_t>(a) * 2], mean.x, 1e-6 * std::abs(mean.x) + 1e-12);
        EXPECT_NEAR(c.centroids[static_cast<std::size_t>(a) * 2 + 1], mean.y, 1e-6 * std::abs(mean.y) + 1e-12);
    }
}

TEST(DaviesBouldin, SingletonClustersScoreZero)
{
    const auto f = points({{0, 0}, {1, 0}});
    Clustering c;
    c.k = 2;
    c.assignment = {0, 1};
    EXPECT_EQ(davies_bouldin(f, c), 0.0);
}

TEST(DaviesBouldin, TwoTightBlobs)
{
    // Four points per blob on the axes at distance 0.1 from each centre.
    std::vector<Vec2> ps;
    for (Vec2 centre : {Vec2{0, 0}, Vec2{10, 0}})
        for (Vec2 d : {Vec2{0.1, 0}, Vec2{-0.1, 0}, Vec2{0, 0.1}, Vec2{0, -0.1}})
            ps.push_back(centre + d);
    Clustering c;
    c.k = 2;
    c.assignment = {0, 0, 0, 0, 1, 1, 1, 1};
    EXPECT_NEAR(davies_bouldin(points(ps), c), 0.02, 1e-12);
}

TEST(DaviesBouldin, EmptyClusterIsAnError)
{
    Clustering c;
    c.k = 3;
    c.assignment = {0, 1};
    EXPECT_THROW(davies_bouldin(points({{0, 0}, {1, 1}}), c), Error);
}

TEST(DaviesBouldin, TrueKBeatsNeighbours)
{
    std::mt19937_64 rng(83);
    const auto f = six_blobs(rng);
    std::vector<double> db;
    for (int k = 5; k <= 7; ++k)
        db.push_back(davies_bouldin(f, kmeans(f, k, 30, 11)));
    EXPECT_LE(db[1], db[0]);
    EXPECT_LE(db[1], db[2]);
}

TEST(SelectBins, SixBlobsChooseSix)
{
    std::mt19937_64 rng(89);
    const auto f = six_blobs(rng);
    const auto s = select_bins(f, 4, 16, 30, 5);
    EXPECT_EQ(s.bin_count, 6);
    EXPECT_EQ(s.scores.size(), 13u);
}

TEST(SelectBins, IdenticalPointsFallBackToKmin)
{
    FeatureMatrix f(20, 2);
    const auto s = select_bins(f, 4, 16, 5, 1);
    EXPECT_EQ(s.bin_count, 4);
    for (int b : s.bins)
        EXPECT_EQ(b, 0);
}

TEST(SelectBins, SingleCandidateMatchesKMeans)
{
    std::mt19937_64 rng(97);
    std::uniform_real_distribution<double> coord(0, 100);
    std::vector<Vec2> ps;
    for (int i = 0; i < 120; ++i)
        ps.push_back({coord(rng), coord(rng)});
    const auto f = points(ps);
    const auto s = select_bins(f, 4, 4, 10, 42);
    EXPECT_EQ(s.bin_count, 4);
    EXPECT_EQ(s.bins, kmeans(f, 4, 10, detail::restart_seed(42, 1000003ULL * 4)).assignment);
}

TEST(SelectBins, TranslationEquivariantForOriginDestination)
{
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> coord(0, 1000);
    Graph g;
    for (int i = 0; i < 60; ++i)
        g.nodes.push_back({std::to_string(i), {coord(rng), coord(rng)}});
    for (int i = 0; i < 150; ++i) {
        const auto a = static_cast<std::size_t>(rng() % 60);
        const auto b = (a + 1 + static_cast<std::size_t>(rng() % 59)) % 60;
        g.edges.push_back({a, b, 1.0, 0});
    }
    Graph moved = g;
    for (auto& n : moved.nodes)
        n.position = n.position + Vec2{250, -125};
    for (Criterion c : {Criterion::origin, Criterion::destination, Criterion::origin_destination}) {
        const auto a = select_bins(edge_features(g, c), 4, 8, 10, 3);
        const auto b = select_bins(edge_features(moved, c), 4, 8, 10, 3);
        EXPECT_EQ(a.bin_count, b.bin_count);
        EXPECT_EQ(a.bins, b.bins);
    }
}

TEST(OrderBinsByFeature, AscendingCentroids)
{
    FeatureMatrix f(4, 1);
    f.values = {30, 1, 20, 2};
    std::vector<int> bins{0, 1, 2, 1};
    order_bins_by_feature(bins, 3, f);
    EXPECT_EQ(bins, (std::vector<int>{2, 0, 1, 0}));
}
