#ifndef HBUNDLE_CORE_HPP
#define HBUNDLE_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hbundle/geometry.hpp"

namespace hbundle {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct Node
{
    std::string id;
    Vec2 position;
};

struct Edge
{
    std::size_t source = 0; ///< index into Graph::nodes
    std::size_t target = 0; ///< index into Graph::nodes
    double weight = 1.0;
    int bin = 0;
};

struct Graph
{
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    int bin_count = 1;

    Vec2 source_position(const Edge& e) const { return nodes[e.source].position; }
    Vec2 target_position(const Edge& e) const { return nodes[e.target].position; }

    void validate() const
    {
        if (bin_count < 1)
            throw Error("bin count must be positive");
        for (const auto& n : nodes)
            if (!std::isfinite(n.position.x) || !std::isfinite(n.position.y))
                throw Error("node '" + n.id + "' has a non-finite position");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const Edge& e = edges[i];
            if (e.source >= nodes.size() || e.target >= nodes.size())
                throw Error("edge " + std::to_string(i) + " references a missing node");
            if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
                throw Error("edge " + std::to_string(i) + " has an invalid weight");
            if (e.bin < 0 || e.bin >= bin_count)
                throw Error("edge " + std::to_string(i) + " has bin outside [0, bin_count)");
        }
    }
};

/// Polyline of one edge, in world coordinates. The first and last points are the
/// node positions and are never written after construction.
struct SampledEdge
{
    std::size_t edge_index = 0;
    std::vector<Vec2> points;
};

struct Cell
{
    int x = 0;
    int y = 0;
    friend constexpr bool operator==(Cell, Cell) = default;
};

inline int nearest_cell(double c) { return static_cast<int>(std::floor(c + 0.5)); }
inline Cell nearest_cell(Vec2 g) { return {nearest_cell(g.x), nearest_cell(g.y)}; }

/// Uniform mapping between world coordinates and continuous grid coordinates.
/// Integer grid coordinates are cell centres.
struct GridTransform
{
    Vec2 origin;
    double cell_size = 1.0;
    int width = 1;
    int height = 1;
    double padding = 0.0;

    Vec2 to_grid(Vec2 p) const { return {(p.x - origin.x) / cell_size, (p.y - origin.y) / cell_size}; }
    Vec2 to_world(Vec2 g) const { return {origin.x + g.x * cell_size, origin.y + g.y * cell_size}; }
    int dominant() const { return std::max(width, height); }
    bool contains(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }

    /// Closed box in which moving sample points are kept: one cell away from every
    /// border so that central differences and bilinear lookups stay in range.
    Vec2 clamp_interior(Vec2 g) const
    {
        return {std::clamp(g.x, 1.0, static_cast<double>(width - 2)),
                std::clamp(g.y, 1.0, static_cast<double>(height - 2))};
    }
};

inline Vec2 world_to_grid(Vec2 p, const GridTransform& t) { return t.to_grid(p); }
inline Vec2 grid_to_world(Vec2 g, const GridTransform& t) { return t.to_world(g); }

/// The dominant axis spans `grid_size` cells with exactly `padding_cells` of margin;
/// the other axis follows the aspect ratio of the node bounding box and is centred.
/// A null extent is widened to 2*padding+1 cells.
inline GridTransform make_transform(std::span<const Node> nodes, int grid_size, double padding_cells)
{
    if (nodes.empty())
        throw Error("empty graph");
    if (padding_cells < 0.0)
        throw Error("padding must be non-negative");
    if (grid_size < 2.0 * padding_cells + 1.0)
        throw Error("grid size " + std::to_string(grid_size) + " too small for padding " +
                    std::to_string(padding_cells));

    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi{-lo.x, -lo.y};
    for (const auto& n : nodes) {
        lo.x = std::min(lo.x, n.position.x);
        lo.y = std::min(lo.y, n.position.y);
        hi.x = std::max(hi.x, n.position.x);
        hi.y = std::max(hi.y, n.position.y);
    }
    if (!std::isfinite(lo.x) || !std::isfinite(lo.y) || !std::isfinite(hi.x) || !std::isfinite(hi.y))
        throw Error("non-finite node position");

    const double w = hi.x - lo.x;
    const double h = hi.y - lo.y;
    const Vec2 centre = (lo + hi) * 0.5;

    GridTransform t;
    t.padding = padding_cells;
    const int min_extent = static_cast<int>(std::ceil(2.0 * padding_cells)) + 1;
    auto minor_cells = [&](double extent) {
        const double cells = std::ceil(extent / t.cell_size + 2.0 * padding_cells - 1e-9);
        return std::max(static_cast<int>(cells), min_extent);
    };

    if (w == 0.0 && h == 0.0) {
        t.cell_size = 1.0;
        t.width = t.height = grid_size;
    } else if (w >= h) {
        t.cell_size = w / (grid_size - 2.0 * padding_cells);
        t.width = grid_size;
        t.height = minor_cells(h);
    } else {
        t.cell_size = h / (grid_size - 2.0 * padding_cells);
        t.height = grid_size;
        t.width = minor_cells(w);
    }
    if (w >= h && w > 0.0)
        t.origin.x = lo.x - padding_cells * t.cell_size;
    else
        t.origin.x = centre.x - 0.5 * t.width * t.cell_size;
    if (h > w)
        t.origin.y = lo.y - padding_cells * t.cell_size;
    else
        t.origin.y = centre.y - 0.5 * t.height * t.cell_size;
    return t;
}

/// Row-major 2D array.
template <typename T>
class Grid2D
{
public:
    Grid2D() = default;
    Grid2D(int width, int height, T fill = T{})
        : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill)
    {
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    const T& operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    std::span<T> row(int y) { return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)}; }
    std::span<const T> row(int y) const
    {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    friend bool operator==(const Grid2D&, const Grid2D&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using Layer = Grid2D<float>;

/// Stack of per-bin density layers sharing one grid transform.
struct DensityField
{
    GridTransform transform;
    std::vector<Layer> layers;

    DensityField() = default;
    DensityField(const GridTransform& t, int layer_count)
        : transform(t), layers(static_cast<std::size_t>(layer_count), Layer(t.width, t.height))
    {
    }

    int layer_count() const { return static_cast<int>(layers.size()); }
    int width() const { return transform.width; }
    int height() const { return transform.height; }
};

/// B x B coupling between histogram layers (rows) and edge bins (columns).
class InteractionMatrix
{
public:
    InteractionMatrix() : InteractionMatrix(1) {}
    explicit InteractionMatrix(int size) : size_(size), entries_(static_cast<std::size_t>(size) * size, 0.0)
    {
        if (size < 1)
            throw Error("interaction matrix size must be positive");
        for (int i = 0; i < size; ++i)
            (*this)(i, i) = 1.0;
    }

    static InteractionMatrix identity(int size) { return InteractionMatrix(size); }

    /// 1 on the diagonal, -alpha/(B-1) elsewhere.
    static InteractionMatrix repulsion(int size, double alpha)
    {
        InteractionMatrix m(size);
        if (size > 1) {
            const double off = -alpha / (size - 1);
            for (int l = 0; l < size; ++l)
                for (int b = 0; b < size; ++b)
                    if (l != b)
                        m(l, b) = off;
        }
        return m;
    }

    int size() const { return size_; }
    double& operator()(int layer, int bin) { return entries_[static_cast<std::size_t>(layer) * size_ + bin]; }
    double operator()(int layer, int bin) const { return entries_[static_cast<std::size_t>(layer) * size_ + bin]; }

    bool is_identity() const
    {
        for (int l = 0; l < size_; ++l)
            for (int b = 0; b < size_; ++b)
                if ((*this)(l, b) != (l == b ? 1.0 : 0.0))
                    return false;
        return true;
    }

private:
    int size_ = 1;
    std::vector<double> entries_;
};

enum class AdvectionMode
{
    adaptive, ///< halve the step until density does not decrease
    fixed,    ///< always take the full step; comparison baseline for tests
};

/// Tunable parameters. Lengths (sigma, h_max, delta) are in grid cells.
struct BundleConfig
{
    int grid_size = 800;
    std::optional<double> sigma;  ///< default grid_size / 40
    std::optional<double> h_max;  ///< default 2 * sigma
    double lambda = 0.9;
    int iterations = 10;
    int smoothing_passes = 3;
    double alpha = 0.25;
    double delta = 3.0;
    double laplacian_factor = 0.5;
    int laplacian_passes = 1;
    double directed_offset_fraction = 0.0;
    double epsilon = 1e-8;
    double min_step = 0.25;
    unsigned random_seed = 0;
    unsigned workers = 4;
    AdvectionMode advection = AdvectionMode::adaptive;

    double resolved_sigma() const { return sigma.value_or(grid_size / 40.0); }
    double resolved_h_max() const { return h_max.value_or(2.0 * resolved_sigma()); }
    double padding_cells() const { return std::ceil(resolved_h_max()) + 1.0; }

    /// Throws on unusable values; returns advisory warnings otherwise.
    std::vector<std::string> validate() const
    {
        const double s = resolved_sigma();
        const double h = resolved_h_max();
        if (grid_size < 8)
            throw Error("grid size must be at least 8");
        if (!(s > 0.0))
            throw Error("sigma must be positive");
        if (!(h >= 0.0))
            throw Error("h_max must be non-negative");
        if (!(lambda > 0.0 && lambda <= 1.0))
            throw Error("lambda must be in (0, 1]");
        if (iterations < 0)
            throw Error("iterations must be non-negative");
        if (smoothing_passes < 1)
            throw Error("smoothing passes must be at least 1");
        if (!(alpha >= 0.0))
            throw Error("alpha must be non-negative");
        if (!(delta > 0.0))
            throw Error("delta must be positive");
        if (!(laplacian_factor > 0.0 && laplacian_factor <= 1.0))
            throw Error("laplacian factor must be in (0, 1]");
        if (laplacian_passes < 0)
            throw Error("laplacian passes must be non-negative");
        if (!(directed_offset_fraction >= 0.0))
            throw Error("directed offset fraction must be non-negative");
        if (!(epsilon > 0.0))
            throw Error("epsilon must be positive");
        if (!(min_step > 0.0))
            throw Error("minimum step must be positive");

        std::vector<std::string> warnings;
        if (h < s || h > 3.0 * s)
            warnings.push_back("h_max outside the usual range [sigma, 3*sigma]");
        if (lambda < 0.5)
            warnings.push_back("lambda below 0.5 freezes bundling quickly");
        return warnings;
    }
};

} // namespace hbundle

#endif // HBUNDLE_CORE_HPP
