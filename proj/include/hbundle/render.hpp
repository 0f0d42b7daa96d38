#ifndef HBUNDLE_RENDER_HPP
#define HBUNDLE_RENDER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <png.h>

#include "hbundle/core.hpp"
#include "hbundle/graph_io.hpp"
#include "hbundle/raster.hpp"

namespace hbundle {

struct Rgb
{
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    friend constexpr bool operator==(Rgb, Rgb) = default;
};

struct Color
{
    Rgb rgb;
    double alpha = 1.0;
};

inline Rgb hsl_to_rgb(double hue_degrees, double s, double l)
{
    const double h = std::fmod(std::fmod(hue_degrees, 360.0) + 360.0, 360.0) / 60.0;
    const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
    const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
    }
    const double m = l - 0.5 * c;
    auto to8 = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
    return {to8(r + m), to8(g + m), to8(b + m)};
}

/// Relative luminance proxy used to order sequential colours.
inline double luminance(Rgb c) { return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b; }

inline double hue_of(Rgb c)
{
    const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    if (d == 0.0)
        return 0.0;
    double h = 0.0;
    if (mx == r)
        h = std::fmod((g - b) / d, 6.0);
    else if (mx == g)
        h = (b - r) / d + 2.0;
    else
        h = (r - g) / d + 4.0;
    h *= 60.0;
    return h < 0.0 ? h + 360.0 : h;
}

struct ColorScheme
{
    enum class Kind
    {
        sequential,    ///< ordinal bins: darker for higher bins
        modal_hue,     ///< cyclic bins: equally spaced hues
        nominal,       ///< categorical bins: distinct palette entries
        flow_blue_red, ///< per-vertex blue (source) to red (target)
    };

    Kind kind = Kind::nominal;
    double base_hue = 210.0;
    double saturation = 0.75;
    double light_high = 0.80; ///< lightness of bin 0 (sequential)
    double light_low = 0.25;  ///< lightness of the last bin (sequential)
    std::vector<Rgb> categories = {
        {31, 119, 180},  {255, 127, 14},  {44, 160, 44},   {214, 39, 40},
        {148, 103, 189}, {140, 86, 75},   {227, 119, 194}, {127, 127, 127},
        {188, 189, 34},  {23, 190, 207},  {174, 199, 232}, {255, 187, 120},
        {152, 223, 138}, {255, 152, 150}, {197, 176, 213}, {196, 156, 148},
    };
    Rgb flow_start{33, 102, 172};
    Rgb flow_end{178, 24, 43};
};

/// Colour at arc-length parameter t in [0, 1] for the flow scheme.
inline Rgb flow_color(const ColorScheme& s, double t)
{
    t = std::clamp(t, 0.0, 1.0);
    auto mix = [t](std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(std::lround(a + (b - a) * t));
    };
    return {mix(s.flow_start.r, s.flow_end.r), mix(s.flow_start.g, s.flow_end.g), mix(s.flow_start.b, s.flow_end.b)};
}

inline Color color_for_bin(const ColorScheme& s, int bin, int bin_count)
{
    if (bin_count < 1 || bin < 0 || bin >= bin_count)
        throw Error("bin " + std::to_string(bin) + " outside [0, " + std::to_string(bin_count) + ")");
    switch (s.kind) {
    case ColorScheme::Kind::sequential: {
        const double t = bin_count > 1 ? static_cast<double>(bin) / (bin_count - 1) : 0.5;
        return {hsl_to_rgb(s.base_hue, s.saturation, s.light_high + (s.light_low - s.light_high) * t), 1.0};
    }
    case ColorScheme::Kind::modal_hue:
        return {hsl_to_rgb(360.0 * bin / bin_count, 0.85, 0.5), 1.0};
    case ColorScheme::Kind::nominal:
        if (static_cast<std::size_t>(bin) < s.categories.size())
            return {s.categories[static_cast<std::size_t>(bin)], 1.0};
        return {hsl_to_rgb(137.508 * bin, 0.7, 0.45), 1.0};
    case ColorScheme::Kind::flow_blue_red:
        return {flow_color(s, 0.5), 1.0};
    }
    return {};
}

struct RenderOptions
{
    double width_min = 0.5; ///< stroke width in grid cells
    double width_max = 4.0;
    std::optional<double> alpha; ///< default 0.15 above 1000 edges, else 0.5
    bool log_scale = false;
    Rgb background{255, 255, 255};

    double resolved_alpha(std::size_t edge_count) const { return alpha.value_or(edge_count > 1000 ? 0.15 : 0.5); }
};

/// Largest value of one layer, ignoring the padding ring.
inline double layer_peak(const DensityField& field, int layer)
{
    const Layer& L = field.layers[static_cast<std::size_t>(layer)];
    int pad = static_cast<int>(field.transform.padding);
    if (2 * pad >= L.width() || 2 * pad >= L.height())
        pad = 0;
    double peak = 0.0;
    for (int y = pad; y < L.height() - pad; ++y)
        for (int x = pad; x < L.width() - pad; ++x)
            peak = std::max(peak, static_cast<double>(L(x, y)));
    return peak;
}

/// Maps segment density to stroke width; peaks are computed once per layer.
class WidthScale
{
public:
    WidthScale(const DensityField& field, double w_min, double w_max, bool log_scale)
        : field_(&field), w_min_(w_min), w_max_(w_max), log_(log_scale)
    {
        if (w_min > w_max)
            throw Error("minimum width exceeds maximum width");
        peaks_.reserve(field.layers.size());
        for (int l = 0; l < field.layer_count(); ++l)
            peaks_.push_back(layer_peak(field, l));
    }

    /// `a` and `b` are world points.
    double width(int layer, Vec2 a, Vec2 b) const
    {
        const GridTransform& t = field_->transform;
        const double da = std::max(0.0, density_at(*field_, layer, t.to_grid(a)));
        const double db = std::max(0.0, density_at(*field_, layer, t.to_grid(b)));
        return from_density(layer, 0.5 * (da + db));
    }

    double from_density(int layer, double d) const
    {
        const double peak = peaks_[static_cast<std::size_t>(layer)];
        double r = peak > 0.0 ? std::clamp(d / peak, 0.0, 1.0) : 0.0;
        if (log_)
            r = std::log1p(99.0 * r) / std::log1p(99.0);
        return w_min_ + (w_max_ - w_min_) * r;
    }

private:
    const DensityField* field_;
    double w_min_;
    double w_max_;
    bool log_;
    std::vector<double> peaks_;
};

inline double width_for_segment(const DensityField& field, int layer, Vec2 a, Vec2 b, double w_min, double w_max,
                                bool log_scale)
{
    if (w_min > w_max)
        throw Error("minimum width exceeds maximum width");
    const GridTransform& t = field.transform;
    const double da = std::max(0.0, density_at(field, layer, t.to_grid(a)));
    const double db = std::max(0.0, density_at(field, layer, t.to_grid(b)));
    const double peak = layer_peak(field, layer);
    double r = peak > 0.0 ? std::clamp(0.5 * (da + db) / peak, 0.0, 1.0) : 0.0;
    if (log_scale)
        r = std::log1p(99.0 * r) / std::log1p(99.0);
    return w_min + (w_max - w_min) * r;
}

namespace detail {

inline std::string hex(Rgb c)
{
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

/// Closed outline of a polyline whose segment j has full width widths[j]
/// (bevel joins). Returned as left side forward then right side backward.
inline std::vector<Vec2> ribbon_outline(const std::vector<Vec2>& pts, const std::vector<double>& widths)
{
    std::vector<Vec2> left;
    std::vector<Vec2> right;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        const Vec2 d = pts[j + 1] - pts[j];
        const double len = norm(d);
        const Vec2 n = len > 0.0 ? left_normal(d / len) * (0.5 * widths[j]) : Vec2{};
        left.push_back(pts[j] + n);
        left.push_back(pts[j + 1] + n);
        right.push_back(pts[j] - n);
        right.push_back(pts[j + 1] - n);
    }
    left.insert(left.end(), right.rbegin(), right.rend());
    return left;
}

} // namespace detail

inline std::vector<double> segment_widths(const SampledEdge& s, int layer, const WidthScale& scale)
{
    std::vector<double> w;
    w.reserve(s.points.size());
    for (std::size_t j = 0; j + 1 < s.points.size(); ++j)
        w.push_back(scale.width(layer, s.points[j], s.points[j + 1]));
    return w;
}

/// One filled <path> per edge outlining its variable-width stroke, in world units.
inline std::string render_svg(const BundleResult& result, const ColorScheme& scheme, const RenderOptions& opts)
{
    const GridTransform& t = result.density.transform;
    const double alpha = opts.resolved_alpha(result.edges.size());
    const bool flow = scheme.kind == ColorScheme::Kind::flow_blue_red;
    const int bins = std::max(result.graph.bin_count, result.density.layer_count());

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" + format_coordinate(t.origin.x) + ' ' +
           format_coordinate(t.origin.y) + ' ' + format_coordinate(t.width * t.cell_size) + ' ' +
           format_coordinate(t.height * t.cell_size) + "\" width=\"" + std::to_string(t.width) + "\" height=\"" +
           std::to_string(t.height) + "\">\n";
    out += "<rect x=\"" + format_coordinate(t.origin.x) + "\" y=\"" + format_coordinate(t.origin.y) + "\" width=\"" +
           format_coordinate(t.width * t.cell_size) + "\" height=\"" + format_coordinate(t.height * t.cell_size) +
           "\" fill=\"" + detail::hex(opts.background) + "\"/>\n";
    if (result.edges.empty()) {
        out += "</svg>\n";
        return out;
    }

    const WidthScale scale(result.density, opts.width_min * t.cell_size, opts.width_max * t.cell_size, opts.log_scale);
    if (flow) {
        out += "<defs>\n";
        for (const auto& s : result.edges) {
            const Vec2 a = s.points.front();
            const Vec2 b = s.points.back();
            out += "<linearGradient id=\"f" + std::to_string(s.edge_index) +
                   "\" gradientUnits=\"userSpaceOnUse\" x1=\"" + format_coordinate(a.x) + "\" y1=\"" +
                   format_coordinate(a.y) + "\" x2=\"" + format_coordinate(b.x) + "\" y2=\"" + format_coordinate(b.y) +
                   "\"><stop offset=\"0\" stop-color=\"" + detail::hex(scheme.flow_start) +
                   "\"/><stop offset=\"1\" stop-color=\"" + detail::hex(scheme.flow_end) + "\"/></linearGradient>\n";
        }
        out += "</defs>\n";
    }

    char alpha_text[32];
    std::snprintf(alpha_text, sizeof alpha_text, "%.4g", alpha);
    for (const auto& s : result.edges) {
        const int bin = result.graph.edges[s.edge_index].bin;
        const int layer = std::min(bin, result.density.layer_count() - 1);
        const auto outline = detail::ribbon_outline(s.points, segment_widths(s, layer, scale));
        out += "<path d=\"";
        for (std::size_t k = 0; k < outline.size(); ++k) {
            out += k == 0 ? "M" : " L";
            out += format_coordinate(outline[k].x);
            out += ' ';
            out += format_coordinate(outline[k].y);
        }
        out += " Z\" fill=\"";
        out += flow ? "url(#f" + std::to_string(s.edge_index) + ")" : detail::hex(color_for_bin(scheme, bin, bins).rgb);
        out += "\" fill-opacity=\"";
        out += alpha_text;
        out += "\" data-edge=\"" + std::to_string(s.edge_index) + "\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

/// Opaque 8-bit RGB image.
struct Image
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    Rgb at(int x, int y) const
    {
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
};

/// Uniform world -> pixel mapping of the padded grid extent, centred in the image.
struct PixelMapping
{
    Vec2 origin;
    double scale = 1.0;
    Vec2 offset;

    PixelMapping(const GridTransform& t, int width, int height)
        : origin(t.origin)
    {
        const double ew = t.width * t.cell_size;
        const double eh = t.height * t.cell_size;
        scale = std::min(width / ew, height / eh);
        offset = {0.5 * (width - ew * scale), 0.5 * (height - eh * scale)};
    }

    Vec2 to_pixel(Vec2 world) const { return (world - origin) * scale + offset; }
};

/// Rasterizes the same variable-width strokes as render_svg. Each edge is covered
/// once (max coverage over its segments) and composited source-over in edge order.
inline Image render_png(const BundleResult& result, const ColorScheme& scheme, const RenderOptions& opts, int width,
                        int height)
{
    if (width <= 0 || height <= 0)
        throw Error("image dimensions must be positive");
    const GridTransform& t = result.density.transform;
    const double alpha = opts.resolved_alpha(result.edges.size());
    const bool flow = scheme.kind == ColorScheme::Kind::flow_blue_red;
    const int bins = std::max(result.graph.bin_count, result.density.layer_count());
    const PixelMapping map(t, width, height);

    const std::size_t pixels = static_cast<std::size_t>(width) * height;
    std::vector<float> canvas(3 * pixels);
    for (std::size_t i = 0; i < pixels; ++i) {
        canvas[3 * i] = opts.background.r;
        canvas[3 * i + 1] = opts.background.g;
        canvas[3 * i + 2] = opts.background.b;
    }

    Image img;
    img.width = width;
    img.height = height;
    img.rgb.resize(3 * pixels);
    if (!result.edges.empty()) {
        const WidthScale scale(result.density, opts.width_min * t.cell_size * map.scale,
                               opts.width_max * t.cell_size * map.scale, opts.log_scale);
        std::vector<float> coverage(pixels, 0.0f);
        std::vector<float> param(flow ? pixels : 0, 0.0f);
        std::vector<std::size_t> touched;
        std::vector<Vec2> px;
        std::vector<double> arc;

        for (const auto& s : result.edges) {
            const int bin = result.graph.edges[s.edge_index].bin;
            const int layer = std::min(bin, result.density.layer_count() - 1);
            const auto widths = segment_widths(s, layer, scale);
            px.clear();
            for (const Vec2& p : s.points)
                px.push_back(map.to_pixel(p));
            arc.assign(px.size(), 0.0);
            for (std::size_t j = 1; j < px.size(); ++j)
                arc[j] = arc[j - 1] + distance(px[j - 1], px[j]);
            const double total = arc.back() > 0.0 ? arc.back() : 1.0;

            touched.clear();
            for (std::size_t j = 0; j + 1 < px.size(); ++j) {
                const double half = 0.5 * widths[j];
                const Vec2 a = px[j];
                const Vec2 b = px[j + 1];
                const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - half - 1.0)));
                const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + half + 1.0)));
                const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - half - 1.0)));
                const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + half + 1.0)));
                for (int y = y0; y <= y1; ++y) {
                    for (int x = x0; x <= x1; ++x) {
                        double u = 0.0;
                        const double d = distance_to_segment({x + 0.5, y + 0.5}, a, b, &u);
                        const float c = static_cast<float>(std::clamp(half + 0.5 - d, 0.0, 1.0));
                        if (c <= 0.0f)
                            continue;
                        const std::size_t i = static_cast<std::size_t>(y) * width + x;
                        if (coverage[i] == 0.0f)
                            touched.push_back(i);
                        if (c > coverage[i]) {
                            coverage[i] = c;
                            if (flow)
                                param[i] = static_cast<float>((arc[j] + u * (arc[j + 1] - arc[j])) / total);
                        }
                    }
                }
            }

            const Rgb base = flow ? Rgb{} : color_for_bin(scheme, bin, bins).rgb;
            for (std::size_t i : touched) {
                const Rgb c = flow ? flow_color(scheme, param[i]) : base;
                const float a = static_cast<float>(alpha) * coverage[i];
                canvas[3 * i] += a * (c.r - canvas[3 * i]);
                canvas[3 * i + 1] += a * (c.g - canvas[3 * i + 1]);
                canvas[3 * i + 2] += a * (c.b - canvas[3 * i + 2]);
                coverage[i] = 0.0f;
            }
        }
    }
    for (std::size_t i = 0; i < canvas.size(); ++i)
        img.rgb[i] = static_cast<std::uint8_t>(std::lround(std::clamp(canvas[i], 0.0f, 255.0f)));
    return img;
}

/// PNG-encodes an image in memory.
inline std::vector<std::uint8_t> encode_png(const Image& img)
{
    if (img.width <= 0 || img.height <= 0)
        throw Error("image dimensions must be positive");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        throw Error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("png_create_info_struct failed");
    }

    std::vector<std::uint8_t> bytes;
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(img.rgb.data() + 3 * static_cast<std::size_t>(y) * img.width);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("png encoding failed");
    }
    png_set_write_fn(
        png, &bytes,
        [](png_structp p, png_bytep data, png_size_t n) {
            auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
            out->insert(out->end(), data, data + n);
        },
        nullptr);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return bytes;
}

inline void write_png(const Image& img, const std::string& path)
{
    const auto bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error("failed to write '" + path + "'");
}

} // namespace hbundle

#endif // HBUNDLE_RENDER_HPP
