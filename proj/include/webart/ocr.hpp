#pragma once
// Text detection behind an injected adapter interface. The built-in detector
// template-matches the 5x7 font the renderer uses (exact on rendered text,
// silent on everything else); real OCR engines plug in via remote.hpp.

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "webart/common.hpp"
#include "webart/font5x7.hpp"
#include "webart/image.hpp"
#include "webart/imaging.hpp"

namespace webart {

struct TextSpan {
    std::string text;
    PixelRegion box;
    double confidence = 1.0;

    bool operator==(const TextSpan&) const = default;
};

class TextDetector {
public:
    virtual ~TextDetector() = default;

    virtual bool available() const { return true; }

    virtual std::vector<TextSpan> detect(const Image& image) const = 0;
};

inline constexpr double kDefaultOcrThreshold = 0.4;

// Spans with confidence >= threshold, in detector order.
inline std::vector<TextSpan> detect_text(const TextDetector& detector, const Image& image,
                                         double threshold = kDefaultOcrThreshold) {
    if (!detector.available()) fail(ErrorKind::oracle, "text detector unavailable");
    std::vector<TextSpan> out;
    for (auto& span : detector.detect(image)) {
        if (span.confidence >= threshold) out.push_back(std::move(span));
    }
    return out;
}

// Exact matcher for text rendered with the built-in font at integer scales.
// Binarizes at mid-gray, reads maximal glyph runs left to right, and claims
// each matched box so nested sub-patterns are not re-reported.
class GlyphTextDetector final : public TextDetector {
public:
    explicit GlyphTextDetector(std::vector<int> scales = {4, 3, 2, 1})
        : scales_(std::move(scales)) {
        for (char c = kFirstGlyph; c <= kLastGlyph; ++c) {
            std::uint64_t code = 0;
            for (int gy = 0; gy < kGlyphHeight; ++gy) {
                for (int gx = 0; gx < kGlyphWidth; ++gx) {
                    code = (code << 1) | (glyph_pixel(c, gx, gy) ? 1u : 0u);
                }
            }
            if (!code_to_char_.emplace(code, c).second) {
                fail(ErrorKind::validation, "glyph detector: duplicate glyph pattern");
            }
        }
    }

    std::vector<TextSpan> detect(const Image& image) const override {
        std::vector<TextSpan> spans;
        if (image.empty()) return spans;
        const auto ink = binarize(image);
        std::vector<PixelRegion> claimed;
        for (int s : scales_) {
            const int gw = kGlyphWidth * s;
            const int gh = kGlyphHeight * s;
            if (gw > image.width || gh > image.height) continue;
            for (int y = 0; y + gh <= image.height; ++y) {
                for (int x = 0; x + gw <= image.width; ++x) {
                    const PixelRegion window{x, y, gw, gh};
                    if (intersects_any(window, claimed)) continue;
                    auto span = read_run(image, ink, x, y, s, claimed);
                    if (span) {
                        claimed.push_back(span->box);
                        spans.push_back(std::move(*span));
                    }
                }
            }
        }
        return spans;
    }

private:
    static std::vector<std::uint8_t> binarize(const Image& img) {
        std::vector<std::uint8_t> ink(static_cast<std::size_t>(img.width) * img.height);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                const Rgb c = img.rgb(x, y);
                const int lum = (int(c.r) + int(c.g) + int(c.b)) / 3;
                ink[static_cast<std::size_t>(y) * img.width + x] = lum < 128 ? 1 : 0;
            }
        }
        return ink;
    }

    static bool intersects_any(const PixelRegion& r, const std::vector<PixelRegion>& boxes) {
        for (const auto& b : boxes) {
            if (r.overlaps(b)) return true;
        }
        return false;
    }

    // Uniform s x s cell value: 0 = blank, 1 = ink, nullopt = mixed.
    static std::optional<int> cell_value(const std::vector<std::uint8_t>& ink, int img_w,
                                         int x, int y, int s) {
        const int first = ink[static_cast<std::size_t>(y) * img_w + x];
        for (int dy = 0; dy < s; ++dy) {
            for (int dx = 0; dx < s; ++dx) {
                if (ink[static_cast<std::size_t>(y + dy) * img_w + (x + dx)] != first) {
                    return std::nullopt;
                }
            }
        }
        return first;
    }

    std::optional<char> glyph_at(const std::vector<std::uint8_t>& ink, int img_w,
                                 int x, int y, int s) const {
        std::uint64_t code = 0;
        bool any_ink = false;
        for (int gy = 0; gy < kGlyphHeight; ++gy) {
            for (int gx = 0; gx < kGlyphWidth; ++gx) {
                const auto v = cell_value(ink, img_w, x + gx * s, y + gy * s, s);
                if (!v) return std::nullopt;
                code = (code << 1) | static_cast<std::uint64_t>(*v);
                any_ink = any_ink || (*v == 1);
            }
        }
        if (!any_ink) return ' ';
        const auto it = code_to_char_.find(code);
        return it == code_to_char_.end() ? std::nullopt : std::optional<char>(it->second);
    }

    bool gap_blank(const std::vector<std::uint8_t>& ink, int img_w, int img_h,
                   int x, int y, int s) const {
        if (x + s > img_w || y + kGlyphHeight * s > img_h) return false;
        for (int dy = 0; dy < kGlyphHeight * s; ++dy) {
            for (int dx = 0; dx < s; ++dx) {
                if (ink[static_cast<std::size_t>(y + dy) * img_w + (x + dx)]) return false;
            }
        }
        return true;
    }

    // A run border must look like background: uniformly blank (light canvas)
    // or uniformly ink (text patch composited onto a dark body). Mixed strips
    // are glyph fragments, which marks a shifted sub-pattern match.
    static bool region_uniform(const std::vector<std::uint8_t>& ink, int img_w, int img_h,
                               int x0, int y0, int w, int h) {
        int first = -1;
        for (int y = std::max(0, y0); y < std::min(img_h, y0 + h); ++y) {
            for (int x = std::max(0, x0); x < std::min(img_w, x0 + w); ++x) {
                const int v = ink[static_cast<std::size_t>(y) * img_w + x];
                if (first < 0) first = v;
                if (v != first) return false;
            }
        }
        return true;
    }

    std::optional<TextSpan> read_run(const Image& image, const std::vector<std::uint8_t>& ink,
                                     int x, int y, int s,
                                     const std::vector<PixelRegion>& claimed) const {
        const auto first = glyph_at(ink, image.width, x, y, s);
        if (!first || *first == ' ') return std::nullopt;
        if (!region_uniform(ink, image.width, image.height, x - s, y, s, kGlyphHeight * s)) {
            return std::nullopt;  // left border is a glyph fragment
        }
        std::string text(1, *first);
        int cells = 1;
        int pending_spaces = 0;
        int cx = x + (kGlyphWidth + 1) * s;
        while (cx + kGlyphWidth * s <= image.width) {
            if (!gap_blank(ink, image.width, image.height, cx - s, y, s)) break;
            const PixelRegion next_window{cx, y, kGlyphWidth * s, kGlyphHeight * s};
            if (intersects_any(next_window, claimed)) break;
            const auto g = glyph_at(ink, image.width, cx, y, s);
            if (!g) break;
            if (*g == ' ') {
                if (++pending_spaces > 1) break;  // two blank cells end the run
            } else {
                cells += pending_spaces + 1;
                text.append(static_cast<std::size_t>(pending_spaces), ' ');
                pending_spaces = 0;
                text.push_back(*g);
            }
            cx += (kGlyphWidth + 1) * s;
        }
        const int end_x = x + (cells * (kGlyphWidth + 1) - 1) * s;
        if (!region_uniform(ink, image.width, image.height, end_x, y, s, kGlyphHeight * s)) {
            return std::nullopt;  // run must be maximal on the right as well
        }
        // Same above and below: full-ink glyph rows would otherwise
        // shadow-match bar-like glyphs one cell away vertically.
        if (!region_uniform(ink, image.width, image.height, x, y - s, end_x - x, s) ||
            !region_uniform(ink, image.width, image.height, x, y + kGlyphHeight * s, end_x - x, s)) {
            return std::nullopt;
        }
        TextSpan span;
        span.text = text;
        span.box = PixelRegion{x, y, end_x - x, kGlyphHeight * s};
        span.confidence = 1.0;
        return span;
    }

    std::vector<int> scales_;
    std::unordered_map<std::uint64_t, char> code_to_char_;
};

}  // namespace webart
