#pragma once
// Deterministic artifact insertion and its controls: placement geometry,
// bilinear resize, alpha blending, region masking, and text rasterization.
// Every function here is a pure function of its value inputs; the compositing
// math is pinned (round half up) so outputs are bit-reproducible.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "webart/common.hpp"
#include "webart/font5x7.hpp"
#include "webart/image.hpp"

namespace webart {

// Normalized placement of one artifact: (u, v) is the top-left corner of the
// insertion region as a fraction of image width/height; the artifact's long
// side is the image long side divided by shrink_factor.
struct Placement {
    double u = 0.0;
    double v = 0.0;
    double shrink_factor = 10.0;
    double opacity = 1.0;

    bool operator==(const Placement&) const = default;
};

struct PixelRegion {
    int x = 0, y = 0, w = 0, h = 0;

    bool contains(int px, int py) const {
        return px >= x && py >= y && px < x + w && py < y + h;
    }

    bool overlaps(const PixelRegion& o) const {
        return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
    }

    long long area() const { return static_cast<long long>(w) * h; }

    bool operator==(const PixelRegion&) const = default;
};

struct GridCell {
    int row = 0;
    int col = 0;

    bool operator==(const GridCell&) const = default;
};

// Portable placement: a grid cell plus the size/opacity knobs. Resolves to a
// concrete Placement per image once the artifact's pixel dims are known.
struct CellPlacement {
    GridCell cell;
    double shrink_factor = 10.0;
    double opacity = 1.0;

    bool operator==(const CellPlacement&) const = default;
};

struct PlacementGrid {
    int rows = 3;
    int cols = 3;

    int cell_count() const { return rows * cols; }

    GridCell cell_at(int index) const {
        if (index < 0 || index >= cell_count()) {
            fail(ErrorKind::validation, "PlacementGrid: cell index out of range");
        }
        return GridCell{index / cols, index % cols};
    }

    int index_of(GridCell cell) const { return cell.row * cols + cell.col; }

    PixelRegion cell_region(GridCell cell, int width, int height) const {
        if (cell.row < 0 || cell.row >= rows || cell.col < 0 || cell.col >= cols) {
            fail(ErrorKind::validation, "PlacementGrid: cell out of range");
        }
        const int x0 = cell.col * width / cols;
        const int x1 = (cell.col + 1) * width / cols;
        const int y0 = cell.row * height / rows;
        const int y1 = (cell.row + 1) * height / rows;
        return PixelRegion{x0, y0, x1 - x0, y1 - y0};
    }

    bool operator==(const PlacementGrid&) const = default;
};

inline long long round_half_up(double v) { return static_cast<long long>(std::floor(v + 0.5)); }

// Aspect-preserving target size: artifact long side = image long side / shrink.
inline std::pair<int, int> scaled_payload_size(int payload_w, int payload_h,
                                               int image_w, int image_h,
                                               double shrink_factor) {
    if (payload_w <= 0 || payload_h <= 0) {
        fail(ErrorKind::validation, "scaled_payload_size: empty payload");
    }
    if (shrink_factor < 1.0) {
        fail(ErrorKind::validation, "scaled_payload_size: shrink_factor must be >= 1");
    }
    const int image_long = std::max(image_w, image_h);
    const long long target_long = std::max<long long>(1, round_half_up(image_long / shrink_factor));
    int w, h;
    if (payload_w >= payload_h) {
        w = static_cast<int>(target_long);
        h = static_cast<int>(std::max<long long>(
            1, round_half_up(static_cast<double>(payload_h) * target_long / payload_w)));
    } else {
        h = static_cast<int>(target_long);
        w = static_cast<int>(std::max<long long>(
            1, round_half_up(static_cast<double>(payload_w) * target_long / payload_h)));
    }
    return {w, h};
}

// Concrete pixel region a placement selects for a given payload; throws if the
// region does not lie fully inside the image.
inline PixelRegion placement_region(const Placement& p, int image_w, int image_h,
                                    int payload_w, int payload_h) {
    const auto [w, h] = scaled_payload_size(payload_w, payload_h, image_w, image_h, p.shrink_factor);
    const int x = static_cast<int>(round_half_up(p.u * image_w));
    const int y = static_cast<int>(round_half_up(p.v * image_h));
    if (x < 0 || y < 0 || x + w > image_w || y + h > image_h) {
        fail(ErrorKind::validation, "placement region out of bounds");
    }
    return PixelRegion{x, y, w, h};
}

// Centers the artifact in the requested grid cell. Throws if the scaled
// artifact does not fit inside the cell (callers catch and skip the cell);
// containment is what keeps distinct-cell placements non-overlapping.
inline Placement resolve_cell_placement(const PlacementGrid& grid, const CellPlacement& cp,
                                        int image_w, int image_h,
                                        int payload_w, int payload_h) {
    const auto [w, h] = scaled_payload_size(payload_w, payload_h, image_w, image_h, cp.shrink_factor);
    const PixelRegion cell = grid.cell_region(cp.cell, image_w, image_h);
    if (w > cell.w || h > cell.h) {
        fail(ErrorKind::validation, "cell placement out of bounds");
    }
    const int x = cell.x + (cell.w - w) / 2;
    const int y = cell.y + (cell.h - h) / 2;
    Placement p;
    p.u = static_cast<double>(x) / image_w;
    p.v = static_cast<double>(y) / image_h;
    p.shrink_factor = cp.shrink_factor;
    p.opacity = cp.opacity;
    // Guard against round-tripping drift between u*W and x.
    const int rx = static_cast<int>(round_half_up(p.u * image_w));
    const int ry = static_cast<int>(round_half_up(p.v * image_h));
    if (rx != x || ry != y) {
        fail(ErrorKind::validation, "cell placement anchor not representable");
    }
    return p;
}

inline Image resize_bilinear(const Image& src, int out_w, int out_h) {
    if (src.empty()) fail(ErrorKind::validation, "resize_bilinear: empty source");
    if (out_w <= 0 || out_h <= 0) fail(ErrorKind::validation, "resize_bilinear: bad target size");
    if (out_w == src.width && out_h == src.height) return src;
    Image out(out_w, out_h, src.channels);
    const double sx = static_cast<double>(src.width) / out_w;
    const double sy = static_cast<double>(src.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        if (fy < 0) fy = 0;
        if (fy > src.height - 1) fy = src.height - 1;
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            if (fx < 0) fx = 0;
            if (fx > src.width - 1) fx = src.width - 1;
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < src.channels; ++c) {
                const double v00 = src.at(x0, y0, c);
                const double v10 = src.at(x1, y0, c);
                const double v01 = src.at(x0, y1, c);
                const double v11 = src.at(x1, y1, c);
                const double top = v00 + (v10 - v00) * wx;
                const double bot = v01 + (v11 - v01) * wx;
                const long long v = round_half_up(top + (bot - top) * wy);
                out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp<long long>(v, 0, 255));
            }
        }
    }
    return out;
}

// Artifact insertion. The payload is resized into the placement region and
// alpha-blended: out = a*payload + (1-a)*base, a = opacity * payload_alpha,
// rounded half up. Pixels outside the region are untouched.
inline Image composite(const Image& base, const Image& payload, const Placement& p) {
    if (p.opacity < 0.0 || p.opacity > 1.0) {
        fail(ErrorKind::validation, "composite: opacity must be in [0,1]");
    }
    const PixelRegion region =
        placement_region(p, base.width, base.height, payload.width, payload.height);
    const Image scaled = resize_bilinear(payload, region.w, region.h);
    Image out = base;
    for (int dy = 0; dy < region.h; ++dy) {
        for (int dx = 0; dx < region.w; ++dx) {
            const double a = p.opacity * (scaled.alpha(dx, dy) / 255.0);
            for (int c = 0; c < 3; ++c) {
                const double art = scaled.at(dx, dy, c);
                const double bg = base.at(region.x + dx, region.y + dy, c);
                const long long v = round_half_up(a * art + (1.0 - a) * bg);
                out.at(region.x + dx, region.y + dy, c) =
                    static_cast<std::uint8_t>(std::clamp<long long>(v, 0, 255));
            }
        }
    }
    return out;
}

inline Image mask_region(const Image& base, const PixelRegion& region, Rgb fill) {
    if (region.x < 0 || region.y < 0 || region.x + region.w > base.width ||
        region.y + region.h > base.height) {
        fail(ErrorKind::validation, "mask_region: region out of bounds");
    }
    Image out = base;
    for (int dy = 0; dy < region.h; ++dy) {
        for (int dx = 0; dx < region.w; ++dx) {
            out.set_rgb(region.x + dx, region.y + dy, fill);
        }
    }
    return out;
}

// Masks exactly the region the matching composite call would touch.
inline Image mask_region(const Image& base, int payload_w, int payload_h,
                         const Placement& p, Rgb fill) {
    const PixelRegion region =
        placement_region(p, base.width, base.height, payload_w, payload_h);
    return mask_region(base, region, fill);
}

struct TextStyle {
    int scale = 2;              // each font pixel becomes scale x scale
    Rgb ink{0, 0, 0};
    Rgb background{255, 255, 255};

    bool operator==(const TextStyle&) const = default;
};

// Rasterizes a string with the built-in 5x7 font and tight-crops to the ink
// bounding box. Deterministic for a fixed style.
inline Image render_text_artifact(const std::string& text, const TextStyle& style = {}) {
    if (text.empty()) fail(ErrorKind::validation, "render_text_artifact: empty string");
    if (style.scale < 1) fail(ErrorKind::validation, "render_text_artifact: scale must be >= 1");
    for (char c : text) {
        if (!glyph_available(c)) {
            fail(ErrorKind::validation,
                 "render_text_artifact: unrenderable glyph (code " + std::to_string(int(c)) + ")");
        }
    }
    const int n = static_cast<int>(text.size());
    const int cell_w = kGlyphWidth + 1;  // one blank column between glyphs
    const int canvas_w = (n * cell_w - 1) * style.scale;
    const int canvas_h = kGlyphHeight * style.scale;
    Image canvas = Image::filled(canvas_w, canvas_h, style.background);
    int min_x = canvas_w, min_y = canvas_h, max_x = -1, max_y = -1;
    for (int i = 0; i < n; ++i) {
        for (int gx = 0; gx < kGlyphWidth; ++gx) {
            for (int gy = 0; gy < kGlyphHeight; ++gy) {
                if (!glyph_pixel(text[static_cast<std::size_t>(i)], gx, gy)) continue;
                for (int sy = 0; sy < style.scale; ++sy) {
                    for (int sx = 0; sx < style.scale; ++sx) {
                        const int x = (i * cell_w + gx) * style.scale + sx;
                        const int y = gy * style.scale + sy;
                        canvas.set_rgb(x, y, style.ink);
                        min_x = std::min(min_x, x);
                        min_y = std::min(min_y, y);
                        max_x = std::max(max_x, x);
                        max_y = std::max(max_y, y);
                    }
                }
            }
        }
    }
    if (max_x < 0) fail(ErrorKind::validation, "render_text_artifact: no visible glyphs");
    Image out(max_x - min_x + 1, max_y - min_y + 1, 3);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            out.set_rgb(x, y, canvas.rgb(min_x + x, min_y + y));
        }
    }
    return out;
}

// Uncropped render on the full glyph grid; the glyph-template OCR and plot
// labelers need cell alignment preserved.
inline Image render_text_block(const std::string& text, const TextStyle& style = {}) {
    if (text.empty()) fail(ErrorKind::validation, "render_text_block: empty string");
    const int n = static_cast<int>(text.size());
    const int cell_w = kGlyphWidth + 1;
    Image canvas = Image::filled((n * cell_w - 1) * style.scale, kGlyphHeight * style.scale,
                                 style.background);
    for (int i = 0; i < n; ++i) {
        if (!glyph_available(text[static_cast<std::size_t>(i)])) {
            fail(ErrorKind::validation, "render_text_block: unrenderable glyph");
        }
        for (int gx = 0; gx < kGlyphWidth; ++gx) {
            for (int gy = 0; gy < kGlyphHeight; ++gy) {
                if (!glyph_pixel(text[static_cast<std::size_t>(i)], gx, gy)) continue;
                for (int sy = 0; sy < style.scale; ++sy) {
                    for (int sx = 0; sx < style.scale; ++sx) {
                        canvas.set_rgb((i * cell_w + gx) * style.scale + sx,
                                       gy * style.scale + sy, style.ink);
                    }
                }
            }
        }
    }
    return canvas;
}

}  // namespace webart
