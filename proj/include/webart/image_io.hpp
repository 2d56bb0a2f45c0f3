#pragma once
// Raster file I/O. Readers: PPM (P6), PGM (P5), PAM (P7, RGB/RGBA), BMP
// (24/32-bit uncompressed). Writers: PPM, PAM, BMP. PAM is the lossless
// interchange format for payloads because it round-trips the alpha channel.

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "webart/common.hpp"
#include "webart/image.hpp"

namespace webart {

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open file: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write file: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::io, "short write: " + path.string());
}

namespace detail {

// PNM-family token scanner that skips '#' comments.
struct PnmScanner {
    std::string_view bytes;
    std::size_t pos = 0;

    std::string token() {
        while (pos < bytes.size()) {
            const char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && bytes[pos] != ' ' && bytes[pos] != '\t' &&
               bytes[pos] != '\r' && bytes[pos] != '\n') {
            ++pos;
        }
        if (start == pos) fail(ErrorKind::parse, "PNM: unexpected end of header");
        return std::string(bytes.substr(start, pos - start));
    }

    int int_token() {
        const std::string t = token();
        try {
            return std::stoi(t);
        } catch (const std::exception&) {
            fail(ErrorKind::parse, "PNM: expected integer, got '" + t + "'");
        }
    }
};

inline std::uint32_t read_u32le(const std::string& b, std::size_t off) {
    return static_cast<std::uint8_t>(b[off]) |
           (static_cast<std::uint8_t>(b[off + 1]) << 8) |
           (static_cast<std::uint8_t>(b[off + 2]) << 16) |
           (static_cast<std::uint8_t>(b[off + 3]) << 24);
}

inline void put_u32le(std::string& b, std::uint32_t v) {
    b.push_back(static_cast<char>(v & 0xff));
    b.push_back(static_cast<char>((v >> 8) & 0xff));
    b.push_back(static_cast<char>((v >> 16) & 0xff));
    b.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_u16le(std::string& b, std::uint16_t v) {
    b.push_back(static_cast<char>(v & 0xff));
    b.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

inline Image decode_pnm(std::string_view bytes) {
    if (bytes.size() < 2) fail(ErrorKind::parse, "PNM: truncated file");
    detail::PnmScanner scan{bytes, 0};
    const std::string magic = scan.token();
    if (magic == "P6" || magic == "P5") {
        const int w = scan.int_token();
        const int h = scan.int_token();
        const int maxval = scan.int_token();
        if (w <= 0 || h <= 0 || maxval != 255) {
            fail(ErrorKind::parse, "PNM: unsupported dimensions or maxval");
        }
        ++scan.pos;  // single whitespace after maxval
        const int src_ch = (magic == "P6") ? 3 : 1;
        const std::size_t need = static_cast<std::size_t>(w) * h * src_ch;
        if (bytes.size() - scan.pos < need) fail(ErrorKind::parse, "PNM: truncated pixel data");
        Image img(w, h, 3);
        const char* p = bytes.data() + scan.pos;
        for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
            if (src_ch == 3) {
                img.data[3 * i] = static_cast<std::uint8_t>(p[3 * i]);
                img.data[3 * i + 1] = static_cast<std::uint8_t>(p[3 * i + 1]);
                img.data[3 * i + 2] = static_cast<std::uint8_t>(p[3 * i + 2]);
            } else {
                const auto v = static_cast<std::uint8_t>(p[i]);
                img.data[3 * i] = img.data[3 * i + 1] = img.data[3 * i + 2] = v;
            }
        }
        return img;
    }
    if (magic == "P7") {  // PAM
        int w = 0, h = 0, depth = 0, maxval = 0;
        for (;;) {
            const std::string key = scan.token();
            if (key == "ENDHDR") break;
            if (key == "WIDTH") w = scan.int_token();
            else if (key == "HEIGHT") h = scan.int_token();
            else if (key == "DEPTH") depth = scan.int_token();
            else if (key == "MAXVAL") maxval = scan.int_token();
            else if (key == "TUPLTYPE") scan.token();
            else fail(ErrorKind::parse, "PAM: unknown header key '" + key + "'");
        }
        ++scan.pos;  // newline after ENDHDR
        if (w <= 0 || h <= 0 || maxval != 255 || (depth != 3 && depth != 4)) {
            fail(ErrorKind::parse, "PAM: unsupported header");
        }
        const std::size_t need = static_cast<std::size_t>(w) * h * depth;
        if (bytes.size() - scan.pos < need) fail(ErrorKind::parse, "PAM: truncated pixel data");
        Image img(w, h, depth);
        const char* p = bytes.data() + scan.pos;
        for (std::size_t i = 0; i < need; ++i) {
            img.data[i] = static_cast<std::uint8_t>(p[i]);
        }
        return img;
    }
    fail(ErrorKind::parse, "PNM: unsupported magic '" + magic + "'");
}

inline std::string encode_ppm(const Image& img) {
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.reserve(out.size() + static_cast<std::size_t>(img.width) * img.height * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Rgb c = img.rgb(x, y);
            out.push_back(static_cast<char>(c.r));
            out.push_back(static_cast<char>(c.g));
            out.push_back(static_cast<char>(c.b));
        }
    }
    return out;
}

inline std::string encode_pam(const Image& img) {
    std::string out = "P7\nWIDTH " + std::to_string(img.width) +
                      "\nHEIGHT " + std::to_string(img.height) +
                      "\nDEPTH " + std::to_string(img.channels) +
                      "\nMAXVAL 255\nTUPLTYPE " +
                      (img.channels == 4 ? "RGB_ALPHA" : "RGB") + "\nENDHDR\n";
    out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
    return out;
}

inline Image decode_bmp(const std::string& bytes) {
    if (bytes.size() < 54 || bytes[0] != 'B' || bytes[1] != 'M') {
        fail(ErrorKind::parse, "BMP: bad signature");
    }
    const std::uint32_t data_offset = detail::read_u32le(bytes, 10);
    const std::uint32_t header_size = detail::read_u32le(bytes, 14);
    if (header_size < 40) fail(ErrorKind::parse, "BMP: unsupported header");
    const auto w = static_cast<std::int32_t>(detail::read_u32le(bytes, 18));
    const auto h_raw = static_cast<std::int32_t>(detail::read_u32le(bytes, 22));
    const std::uint16_t bpp = static_cast<std::uint8_t>(bytes[28]) |
                              (static_cast<std::uint8_t>(bytes[29]) << 8);
    const std::uint32_t compression = detail::read_u32le(bytes, 30);
    if (w <= 0 || h_raw == 0 || (bpp != 24 && bpp != 32) || compression != 0) {
        fail(ErrorKind::parse, "BMP: only uncompressed 24/32-bit supported");
    }
    const bool top_down = h_raw < 0;
    const int h = top_down ? -h_raw : h_raw;
    const int src_ch = bpp / 8;
    const std::size_t row_stride = (static_cast<std::size_t>(w) * src_ch + 3) & ~std::size_t{3};
    if (bytes.size() < data_offset + row_stride * h) fail(ErrorKind::parse, "BMP: truncated pixel data");
    Image img(w, h, src_ch == 4 ? 4 : 3);
    for (int y = 0; y < h; ++y) {
        const int src_y = top_down ? y : (h - 1 - y);
        const char* row = bytes.data() + data_offset + row_stride * src_y;
        for (int x = 0; x < w; ++x) {
            const auto b = static_cast<std::uint8_t>(row[src_ch * x]);
            const auto g = static_cast<std::uint8_t>(row[src_ch * x + 1]);
            const auto r = static_cast<std::uint8_t>(row[src_ch * x + 2]);
            img.set_rgb(x, y, Rgb{r, g, b});
            if (src_ch == 4) img.at(x, y, 3) = static_cast<std::uint8_t>(row[4 * x + 3]);
        }
    }
    return img;
}

inline std::string encode_bmp(const Image& img) {
    const std::size_t row_stride = (static_cast<std::size_t>(img.width) * 3 + 3) & ~std::size_t{3};
    const std::size_t pixel_bytes = row_stride * img.height;
    std::string out;
    out.reserve(54 + pixel_bytes);
    out += "BM";
    detail::put_u32le(out, static_cast<std::uint32_t>(54 + pixel_bytes));
    detail::put_u32le(out, 0);
    detail::put_u32le(out, 54);
    detail::put_u32le(out, 40);
    detail::put_u32le(out, static_cast<std::uint32_t>(img.width));
    detail::put_u32le(out, static_cast<std::uint32_t>(img.height));
    detail::put_u16le(out, 1);
    detail::put_u16le(out, 24);
    detail::put_u32le(out, 0);
    detail::put_u32le(out, static_cast<std::uint32_t>(pixel_bytes));
    detail::put_u32le(out, 2835);
    detail::put_u32le(out, 2835);
    detail::put_u32le(out, 0);
    detail::put_u32le(out, 0);
    for (int y = img.height - 1; y >= 0; --y) {
        const std::size_t row_start = out.size();
        for (int x = 0; x < img.width; ++x) {
            const Rgb c = img.rgb(x, y);
            out.push_back(static_cast<char>(c.b));
            out.push_back(static_cast<char>(c.g));
            out.push_back(static_cast<char>(c.r));
        }
        while (out.size() - row_start < row_stride) out.push_back('\0');
    }
    return out;
}

inline bool is_image_filename(const std::filesystem::path& path) {
    const std::string ext = to_lower(path.extension().string());
    return ext == ".ppm" || ext == ".pgm" || ext == ".pam" || ext == ".bmp";
}

inline Image decode_image(const std::string& bytes, const std::string& name_hint) {
    if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') return decode_bmp(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P') return decode_pnm(bytes);
    fail(ErrorKind::parse, "unrecognized image format: " + name_hint);
}

inline Image load_image(const std::filesystem::path& path) {
    return decode_image(read_file_bytes(path), path.string());
}

inline void save_image(const std::filesystem::path& path, const Image& img) {
    const std::string ext = to_lower(path.extension().string());
    if (ext == ".ppm") {
        write_file_bytes(path, encode_ppm(img));
    } else if (ext == ".pam") {
        write_file_bytes(path, encode_pam(img));
    } else if (ext == ".bmp") {
        write_file_bytes(path, encode_bmp(img));
    } else {
        fail(ErrorKind::validation, "save_image: unsupported extension '" + ext + "'");
    }
}

// --- minimal ustar tar reading/writing (corpus shards) ---

struct TarEntry {
    std::string name;
    std::string bytes;
};

inline std::vector<TarEntry> read_tar(const std::filesystem::path& path) {
    const std::string bytes = read_file_bytes(path);
    std::vector<TarEntry> entries;
    std::size_t pos = 0;
    while (pos + 512 <= bytes.size()) {
        const char* header = bytes.data() + pos;
        if (header[0] == '\0') break;  // end-of-archive blocks
        std::string name(header, strnlen(header, 100));
        char size_field[13];
        std::memcpy(size_field, header + 124, 12);
        size_field[12] = '\0';
        const std::size_t size = static_cast<std::size_t>(std::strtoull(size_field, nullptr, 8));
        const char typeflag = header[156];
        pos += 512;
        if (pos + size > bytes.size()) fail(ErrorKind::parse, "tar: truncated entry " + name);
        if (typeflag == '0' || typeflag == '\0') {
            entries.push_back(TarEntry{name, bytes.substr(pos, size)});
        }
        pos += (size + 511) & ~std::size_t{511};
    }
    return entries;
}

inline void write_tar(const std::filesystem::path& path, const std::vector<TarEntry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        if (e.name.size() > 99) fail(ErrorKind::validation, "tar: name too long: " + e.name);
        char header[512];
        std::memset(header, 0, sizeof(header));
        std::memcpy(header, e.name.data(), e.name.size());
        std::snprintf(header + 100, 8, "%07o", 0644);
        std::snprintf(header + 108, 8, "%07o", 0);
        std::snprintf(header + 116, 8, "%07o", 0);
        std::snprintf(header + 124, 12, "%011llo", static_cast<unsigned long long>(e.bytes.size()));
        std::snprintf(header + 136, 12, "%011o", 0);
        std::memset(header + 148, ' ', 8);
        header[156] = '0';
        std::memcpy(header + 257, "ustar", 5);
        header[263] = '0';
        header[264] = '0';
        unsigned checksum = 0;
        for (unsigned char c : header) checksum += c;
        std::snprintf(header + 148, 8, "%06o", checksum);
        header[155] = ' ';
        out.append(header, 512);
        out.append(e.bytes);
        out.append((512 - e.bytes.size() % 512) % 512, '\0');
    }
    out.append(1024, '\0');
    write_file_bytes(path, out);
}

}  // namespace webart
