#pragma once
// Interleaved 8-bit raster image. channels == 3 (RGB) or 4 (RGBA); the alpha
// channel carries per-pixel opacity for artifact payloads.

#include <cstdint>
#include <string>
#include <vector>

#include "webart/common.hpp"

namespace webart {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;

    bool operator==(const Rgb&) const = default;
};

struct Image {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<std::uint8_t> data;

    Image() = default;
    Image(int w, int h, int c) : width(w), height(h), channels(c) {
        if (w < 0 || h < 0 || (c != 3 && c != 4)) {
            fail(ErrorKind::validation, "Image: bad dimensions or channel count");
        }
        data.assign(static_cast<std::size_t>(w) * h * c, 0);
    }

    static Image filled(int w, int h, Rgb color) {
        Image img(w, h, 3);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                img.set_rgb(x, y, color);
            }
        }
        return img;
    }

    bool empty() const { return width == 0 || height == 0; }

    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }

    std::uint8_t at(int x, int y, int c) const { return data[index(x, y, c)]; }
    std::uint8_t& at(int x, int y, int c) { return data[index(x, y, c)]; }

    Rgb rgb(int x, int y) const {
        return Rgb{at(x, y, 0), at(x, y, 1), at(x, y, 2)};
    }

    void set_rgb(int x, int y, Rgb c) {
        at(x, y, 0) = c.r;
        at(x, y, 1) = c.g;
        at(x, y, 2) = c.b;
    }

    std::uint8_t alpha(int x, int y) const {
        return channels == 4 ? at(x, y, 3) : 255;
    }

    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height;
    }

    bool operator==(const Image&) const = default;
};

inline int color_distance2(Rgb a, Rgb b) {
    const int dr = int(a.r) - int(b.r);
    const int dg = int(a.g) - int(b.g);
    const int db = int(a.b) - int(b.b);
    return dr * dr + dg * dg + db * db;
}

inline Rgb mean_color(const Image& img) {
    if (img.empty()) fail(ErrorKind::validation, "mean_color: empty image");
    std::uint64_t sum[3] = {0, 0, 0};
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            sum[0] += img.at(x, y, 0);
            sum[1] += img.at(x, y, 1);
            sum[2] += img.at(x, y, 2);
        }
    }
    const std::uint64_t n = static_cast<std::uint64_t>(img.width) * img.height;
    return Rgb{static_cast<std::uint8_t>(sum[0] / n),
               static_cast<std::uint8_t>(sum[1] / n),
               static_cast<std::uint8_t>(sum[2] / n)};
}

// Stable identity of the pixel content, independent of where it came from.
inline std::string image_content_key(const Image& img) {
    std::string head = std::to_string(img.width) + "x" + std::to_string(img.height) +
                       "c" + std::to_string(img.channels) + ":";
    return head + std::string(reinterpret_cast<const char*>(img.data.data()), img.data.size());
}

}  // namespace webart
