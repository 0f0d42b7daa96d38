#ifndef HBUNDLE_RASTER_HPP
#define HBUNDLE_RASTER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <span>
#include <vector>

#include "hbundle/core.hpp"
#include "hbundle/parallel.hpp"

namespace hbundle {

/// Visits the 8-connected Bresenham chain from `a` to `b`, both ends included,
/// each cell once. With `skip_first` the cell `a` is not visited.
template <typename F>
void for_each_line_cell(Cell a, Cell b, bool skip_first, F&& visit)
{
    const int dx = std::abs(b.x - a.x);
    const int dy = -std::abs(b.y - a.y);
    const int sx = a.x < b.x ? 1 : -1;
    const int sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    Cell c = a;
    bool first = true;
    for (;;) {
        if (!(first && skip_first))
            visit(c);
        first = false;
        if (c == b)
            break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            c.x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            c.y += sy;
        }
    }
}

/// Cell chain between the cells nearest to two continuous grid points.
inline std::vector<Cell> rasterize_segment(Vec2 p0, Vec2 p1)
{
    std::vector<Cell> cells;
    for_each_line_cell(nearest_cell(p0), nearest_cell(p1), false, [&](Cell c) { cells.push_back(c); });
    return cells;
}

namespace detail {

struct CellChains
{
    std::vector<Cell> cells;
    std::vector<std::size_t> offsets; // edge i owns cells[offsets[i], offsets[i+1])
    std::vector<int> y_min;
    std::vector<int> y_max;
};

inline CellChains to_cell_chains(std::span<const SampledEdge> sampled, const GridTransform& t, unsigned workers)
{
    CellChains chains;
    chains.offsets.resize(sampled.size() + 1, 0);
    for (std::size_t i = 0; i < sampled.size(); ++i)
        chains.offsets[i + 1] = chains.offsets[i] + sampled[i].points.size();
    chains.cells.resize(chains.offsets.back());
    chains.y_min.resize(sampled.size());
    chains.y_max.resize(sampled.size());

    parallel_for(sampled.size(), workers, [&](WorkRange r) {
        for (std::size_t i = r.begin; i < r.end; ++i) {
            int lo = t.height;
            int hi = -1;
            Cell* out = chains.cells.data() + chains.offsets[i];
            for (const Vec2& p : sampled[i].points) {
                const Cell c = nearest_cell(t.to_grid(p));
                if (!t.contains(c))
                    throw Error("sample out of bounds");
                *out++ = c;
                lo = std::min(lo, c.y);
                hi = std::max(hi, c.y);
            }
            chains.y_min[i] = lo;
            chains.y_max[i] = hi;
        }
    });
    return chains;
}

} // namespace detail

/// Per-bin weighted edge histograms (the identity-interaction case).
///
/// Each polyline segment is rasterized with Bresenham; the junction cell shared by
/// consecutive segments of one edge belongs to the earlier segment. Workers own
/// disjoint bands of rows and visit edges in index order, so every cell receives
/// its contributions in the same order for any worker count and the result is
/// bit-identical across worker counts.
inline std::vector<Layer> accumulate_bins(std::span<const SampledEdge> sampled, const Graph& graph, int bin_count,
                                          const GridTransform& t, unsigned workers = 1)
{
    std::vector<Layer> bins(static_cast<std::size_t>(bin_count), Layer(t.width, t.height));
    for (const auto& s : sampled) {
        if (s.edge_index >= graph.edges.size())
            throw Error("sampled edge references a missing edge");
        if (graph.edges[s.edge_index].bin >= bin_count || graph.edges[s.edge_index].bin < 0)
            throw Error("edge bin outside the histogram");
    }
    const detail::CellChains chains = detail::to_cell_chains(sampled, t, workers);

    parallel_for(static_cast<std::size_t>(t.height), workers, [&](WorkRange band) {
        const int row0 = static_cast<int>(band.begin);
        const int row1 = static_cast<int>(band.end);
        for (std::size_t i = 0; i < sampled.size(); ++i) {
            if (chains.y_max[i] < row0 || chains.y_min[i] >= row1)
                continue;
            const Edge& e = graph.edges[sampled[i].edge_index];
            Layer& layer = bins[static_cast<std::size_t>(e.bin)];
            const float w = static_cast<float>(e.weight);
            const Cell* c = chains.cells.data() + chains.offsets[i];
            const std::size_t n = chains.offsets[i + 1] - chains.offsets[i];
            for (std::size_t k = 0; k + 1 < n; ++k) {
                const Cell a = c[k];
                const Cell b = c[k + 1];
                if ((a.y < row0 && b.y < row0) || (a.y >= row1 && b.y >= row1))
                    continue;
                for_each_line_cell(a, b, k > 0, [&](Cell cell) {
                    if (cell.y >= row0 && cell.y < row1)
                        layer(cell.x, cell.y) += w;
                });
            }
            if (n == 1 && c[0].y >= row0 && c[0].y < row1)
                layer(c[0].x, c[0].y) += w;
        }
    });
    return bins;
}

/// Raw 3D histogram H(u, v, l) = sum over edges crossing (u, v) of w_e * M(l, b_e).
inline DensityField accumulate_edges(std::span<const SampledEdge> sampled, const Graph& graph,
                                     const InteractionMatrix& m, const GridTransform& t, unsigned workers = 1)
{
    std::vector<Layer> bins = accumulate_bins(sampled, graph, m.size(), t, workers);
    DensityField field;
    field.transform = t;
    if (m.is_identity()) {
        field.layers = std::move(bins);
        return field;
    }

    const int layer_count = m.size();
    field.layers.assign(static_cast<std::size_t>(layer_count), Layer(t.width, t.height));
    parallel_for(static_cast<std::size_t>(layer_count), workers, [&](WorkRange r) {
        std::vector<double> acc;
        for (std::size_t l = r.begin; l < r.end; ++l) {
            acc.assign(field.layers[l].size(), 0.0);
            for (int b = 0; b < layer_count; ++b) {
                const double coupling = m(static_cast<int>(l), b);
                if (coupling == 0.0)
                    continue;
                const auto& src = bins[static_cast<std::size_t>(b)].data();
                for (std::size_t j = 0; j < acc.size(); ++j)
                    acc[j] += coupling * src[j];
            }
            auto& dst = field.layers[l].data();
            for (std::size_t j = 0; j < acc.size(); ++j)
                dst[j] = static_cast<float>(acc[j]);
        }
    });
    return field;
}

/// Summed-area table with one row and column of leading zeros.
class IntegralImage
{
public:
    explicit IntegralImage(const Layer& layer)
        : width_(layer.width()), height_(layer.height()),
          sums_(static_cast<std::size_t>(layer.width() + 1) * (layer.height() + 1), 0.0)
    {
        const std::size_t stride = static_cast<std::size_t>(width_) + 1;
        for (int y = 0; y < height_; ++y) {
            double row_sum = 0.0;
            const auto src = layer.row(y);
            double* above = sums_.data() + static_cast<std::size_t>(y) * stride;
            double* out = above + stride;
            for (int x = 0; x < width_; ++x) {
                row_sum += src[static_cast<std::size_t>(x)];
                out[x + 1] = above[x + 1] + row_sum;
            }
        }
    }

    /// Sum of all values in rows < y and columns < x.
    double at(int x, int y) const { return sums_[static_cast<std::size_t>(y) * (width_ + 1) + x]; }

    /// Sum over the inclusive box [x0, x1] x [y0, y1], clipped to the grid.
    double box_sum(int x0, int y0, int x1, int y1) const
    {
        x0 = std::max(x0, 0);
        y0 = std::max(y0, 0);
        x1 = std::min(x1, width_ - 1);
        y1 = std::min(y1, height_ - 1);
        if (x0 > x1 || y0 > y1)
            return 0.0;
        return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
    }

    int width() const { return width_; }
    int height() const { return height_; }

private:
    int width_;
    int height_;
    std::vector<double> sums_;
};

inline IntegralImage integral_image(const Layer& layer) { return IntegralImage(layer); }

/// Mean over the (2r+1)^2 window with zeros outside the grid.
inline Layer box_filter(const Layer& layer, int radius)
{
    if (radius < 0)
        throw Error("box filter radius must be non-negative");
    if (radius == 0)
        return layer;
    const IntegralImage sums(layer);
    const double inv_area = 1.0 / ((2.0 * radius + 1.0) * (2.0 * radius + 1.0));
    Layer out(layer.width(), layer.height());
    for (int y = 0; y < layer.height(); ++y) {
        auto dst = out.row(y);
        for (int x = 0; x < layer.width(); ++x)
            dst[static_cast<std::size_t>(x)] =
                static_cast<float>(sums.box_sum(x - radius, y - radius, x + radius, y + radius) * inv_area);
    }
    return out;
}

/// Odd box widths whose cascade variance best matches sigma^2
/// (w_l passes of the lower width followed by the upper width w_l + 2).
inline std::vector<int> gaussian_box_widths(double sigma, int passes)
{
    if (!(sigma > 0.0))
        throw Error("sigma must be positive");
    if (passes < 1)
        throw Error("at least one smoothing pass is required");
    const double n = passes;
    const double var = sigma * sigma;
    const double ideal = std::sqrt(12.0 * var / n + 1.0);
    int lower = static_cast<int>(std::floor(ideal));
    if (lower % 2 == 0)
        --lower;
    lower = std::max(lower, 1);
    const int upper = lower + 2;
    const double m_ideal = (12.0 * var - n * lower * lower - 4.0 * n * lower - 3.0 * n) / (-4.0 * lower - 4.0);
    const int m = std::clamp(static_cast<int>(std::lround(m_ideal)), 0, passes);

    std::vector<int> widths;
    widths.reserve(static_cast<std::size_t>(passes));
    for (int i = 0; i < passes; ++i)
        widths.push_back(i < m ? lower : upper);
    return widths;
}

inline Layer smooth_layer(const Layer& layer, double sigma, int passes)
{
    Layer out = layer;
    for (int w : gaussian_box_widths(sigma, passes))
        out = box_filter(out, (w - 1) / 2);
    return out;
}

/// Approximate Gaussian smoothing of every layer by a cascade of box filters.
/// Layers are independent and are distributed over workers.
inline DensityField smooth_gaussian_approx(const DensityField& field, double sigma, int passes, unsigned workers = 1)
{
    DensityField out;
    out.transform = field.transform;
    out.layers.resize(field.layers.size());
    parallel_for(field.layers.size(), workers, [&](WorkRange r) {
        for (std::size_t l = r.begin; l < r.end; ++l)
            out.layers[l] = smooth_layer(field.layers[l], sigma, passes);
    });
    return out;
}

/// Bilinear lookup at a continuous grid point; coordinates are clamped to the grid.
inline double density_at(const Layer& layer, Vec2 g)
{
    const int w = layer.width();
    const int h = layer.height();
    const double x = std::clamp(g.x, 0.0, static_cast<double>(w - 1));
    const double y = std::clamp(g.y, 0.0, static_cast<double>(h - 1));
    const int x0 = std::min(static_cast<int>(x), std::max(w - 2, 0));
    const int y0 = std::min(static_cast<int>(y), std::max(h - 2, 0));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = (1.0 - fx) * layer(x0, y0) + fx * layer(x1, y0);
    const double bottom = (1.0 - fx) * layer(x0, y1) + fx * layer(x1, y1);
    return (1.0 - fy) * top + fy * bottom;
}

inline double density_at(const DensityField& field, int layer, Vec2 g)
{
    return density_at(field.layers[static_cast<std::size_t>(layer)], g);
}

/// Number of cells whose value exceeds `fraction` of the layer maximum.
inline std::size_t used_cells(const Layer& layer, double fraction = 0.01)
{
    float peak = 0.0f;
    for (float v : layer.data())
        peak = std::max(peak, v);
    if (peak <= 0.0f)
        return 0;
    const double threshold = fraction * peak;
    return static_cast<std::size_t>(
        std::count_if(layer.data().begin(), layer.data().end(), [&](float v) { return v > threshold; }));
}

inline std::size_t used_cells(const DensityField& field, double fraction = 0.01)
{
    std::size_t n = 0;
    for (const auto& layer : field.layers)
        n += used_cells(layer, fraction);
    return n;
}

/// Binary graymap of one layer, linearly mapping [min, max] to [0, 255].
inline void write_pgm(const Layer& layer, std::ostream& out)
{
    float lo = 0.0f;
    float hi = 0.0f;
    if (!layer.data().empty()) {
        const auto [mn, mx] = std::minmax_element(layer.data().begin(), layer.data().end());
        lo = *mn;
        hi = *mx;
    }
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    out << "P5\n" << layer.width() << ' ' << layer.height() << "\n255\n";
    for (float v : layer.data())
        out.put(static_cast<char>(static_cast<std::uint8_t>(std::lround((v - lo) * scale))));
    if (!out)
        throw Error("failed to write graymap");
}

} // namespace hbundle

#endif // HBUNDLE_RASTER_HPP
