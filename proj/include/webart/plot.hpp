#pragma once
// Self-contained report plotting: heatmaps, bar charts, and line plots drawn
// straight into Image buffers with the built-in font. Output goes through
// save_image (BMP by default from the CLI).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "webart/common.hpp"
#include "webart/image.hpp"
#include "webart/imaging.hpp"

namespace webart {
namespace plot {

inline constexpr Rgb kBackground{255, 255, 255};
inline constexpr Rgb kAxis{40, 40, 40};

inline void draw_text(Image& canvas, const std::string& text, int x, int y, int scale = 1,
                      Rgb ink = kAxis) {
    if (text.empty()) return;
    TextStyle style;
    style.scale = scale;
    style.ink = ink;
    style.background = kBackground;
    const Image block = render_text_block(text, style);
    for (int dy = 0; dy < block.height; ++dy) {
        for (int dx = 0; dx < block.width; ++dx) {
            if (block.rgb(dx, dy) == ink && canvas.in_bounds(x + dx, y + dy)) {
                canvas.set_rgb(x + dx, y + dy, ink);
            }
        }
    }
}

inline void draw_rect(Image& canvas, const PixelRegion& r, Rgb color) {
    for (int dy = 0; dy < r.h; ++dy) {
        for (int dx = 0; dx < r.w; ++dx) {
            if (canvas.in_bounds(r.x + dx, r.y + dy)) canvas.set_rgb(r.x + dx, r.y + dy, color);
        }
    }
}

inline void draw_line(Image& canvas, int x0, int y0, int x1, int y1, Rgb color) {
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        if (canvas.in_bounds(x0, y0)) canvas.set_rgb(x0, y0, color);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

// Cold-to-hot map for values in [0,1]; NaN renders light gray.
inline Rgb heat_color(double v) {
    if (std::isnan(v)) return Rgb{220, 220, 220};
    v = std::clamp(v, 0.0, 1.0);
    const auto lerp = [](double a, double b, double t) {
        return static_cast<std::uint8_t>(round_half_up(a + (b - a) * t));
    };
    if (v < 0.5) {
        const double t = v / 0.5;
        return Rgb{lerp(40, 235, t), lerp(70, 235, t), lerp(200, 160, t)};
    }
    const double t = (v - 0.5) / 0.5;
    return Rgb{lerp(235, 205, t), lerp(235, 60, t), lerp(160, 50, t)};
}

inline std::string short_number(double v) {
    if (std::isnan(v)) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline Image heatmap(const std::vector<std::vector<double>>& values, const std::string& title,
                     const std::vector<std::string>& row_labels = {},
                     const std::vector<std::string>& col_labels = {}) {
    if (values.empty() || values[0].empty()) fail(ErrorKind::validation, "heatmap: empty grid");
    const int rows = static_cast<int>(values.size());
    const int cols = static_cast<int>(values[0].size());
    const int cell = 56;
    const int left = row_labels.empty() ? 16 : 110;
    const int top = 34;
    Image canvas = Image::filled(left + cols * cell + 16, top + rows * cell + 30, kBackground);
    draw_text(canvas, title, 8, 8, 2);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double v = values[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            const PixelRegion box{left + c * cell, top + r * cell, cell - 2, cell - 2};
            draw_rect(canvas, box, heat_color(v));
            draw_text(canvas, short_number(v), box.x + 8, box.y + cell / 2 - 4, 1);
        }
        if (r < static_cast<int>(row_labels.size())) {
            draw_text(canvas, row_labels[static_cast<std::size_t>(r)].substr(0, 16), 6,
                      top + r * cell + cell / 2 - 4, 1);
        }
    }
    for (int c = 0; c < cols && c < static_cast<int>(col_labels.size()); ++c) {
        draw_text(canvas, col_labels[static_cast<std::size_t>(c)].substr(0, 8),
                  left + c * cell + 4, top + rows * cell + 8, 1);
    }
    return canvas;
}

inline Image bar_chart(const std::vector<std::string>& labels, const std::vector<double>& values,
                       const std::string& title) {
    if (labels.size() != values.size() || values.empty()) {
        fail(ErrorKind::validation, "bar_chart: labels/values mismatch");
    }
    const int n = static_cast<int>(values.size());
    const int bar_w = 54;
    const int gap = 26;
    const int left = 50;
    const int top = 40;
    const int plot_h = 180;
    Image canvas =
        Image::filled(left + n * (bar_w + gap) + 20, top + plot_h + 46, kBackground);
    draw_text(canvas, title, 8, 8, 2);
    draw_line(canvas, left - 6, top, left - 6, top + plot_h, kAxis);
    draw_line(canvas, left - 6, top + plot_h, canvas.width - 10, top + plot_h, kAxis);
    double vmax = 0.0;
    for (double v : values) vmax = std::max(vmax, v);
    if (vmax <= 0.0) vmax = 1.0;
    for (int i = 0; i < n; ++i) {
        const double v = values[static_cast<std::size_t>(i)];
        const int h = static_cast<int>(round_half_up(plot_h * (v / vmax)));
        const int x = left + i * (bar_w + gap);
        draw_rect(canvas, PixelRegion{x, top + plot_h - h, bar_w, h}, heat_color(v / vmax));
        draw_text(canvas, short_number(v), x + 4, top + plot_h - h - 12, 1);
        draw_text(canvas, labels[static_cast<std::size_t>(i)].substr(0, 10), x,
                  top + plot_h + 8, 1);
    }
    return canvas;
}

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

inline Image line_plot(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
    if (series.empty()) fail(ErrorKind::validation, "line_plot: no series");
    const int left = 56;
    const int top = 40;
    const int plot_w = 360;
    const int plot_h = 200;
    Image canvas = Image::filled(left + plot_w + 30, top + plot_h + 70, kBackground);
    draw_text(canvas, title, 8, 8, 2);
    draw_line(canvas, left, top, left, top + plot_h, kAxis);
    draw_line(canvas, left, top + plot_h, left + plot_w, top + plot_h, kAxis);
    draw_text(canvas, x_label, left + plot_w / 2 - 20, top + plot_h + 26, 1);
    draw_text(canvas, y_label, 6, top - 16, 1);
    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
    for (const auto& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) ymax = std::max(ymax, v);
    }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;
    static const Rgb palette[] = {
        {200, 60, 50}, {50, 110, 200}, {50, 160, 70}, {190, 140, 40}, {140, 60, 180}};
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const Rgb color = palette[si % 5];
        int px = -1, py = -1;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            const int x = left + static_cast<int>(round_half_up(plot_w * (s.x[i] - xmin) / (xmax - xmin)));
            const int y = top + plot_h -
                          static_cast<int>(round_half_up(plot_h * (s.y[i] - ymin) / (ymax - ymin)));
            draw_rect(canvas, PixelRegion{x - 2, y - 2, 4, 4}, color);
            if (px >= 0) draw_line(canvas, px, py, x, y, color);
            px = x;
            py = y;
        }
        draw_text(canvas, s.name.substr(0, 24), left + 8,
                  top + plot_h + 40 + static_cast<int>(si) * 10, 1, color);
    }
    draw_text(canvas, short_number(xmin), left - 8, top + plot_h + 8, 1);
    draw_text(canvas, short_number(xmax), left + plot_w - 20, top + plot_h + 8, 1);
    draw_text(canvas, short_number(ymax), 6, top - 4, 1);
    return canvas;
}

}  // namespace plot
}  // namespace webart
