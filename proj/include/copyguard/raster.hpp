#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <vector>

#include <zlib.h>

namespace copyguard {

using ImageBytes = std::vector<std::uint8_t>;

// 8-bit grayscale raster, row-major. 0 = black, 255 = white.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    static Raster blank(int w, int h, std::uint8_t fill = 0xFF) {
        Raster r;
        r.width = w;
        r.height = h;
        r.pixels.assign(static_cast<std::size_t>(w) * h, fill);
        return r;
    }

    std::uint8_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    bool empty() const { return width <= 0 || height <= 0 || pixels.empty(); }
};

namespace png_detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) |
           (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}

inline void write_chunk(std::vector<std::uint8_t>& out, const char type[4],
                        const std::vector<std::uint8_t>& payload) {
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    auto crc = ::crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

inline int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

constexpr std::uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

}  // namespace png_detail

// Encodes as 8-bit grayscale PNG, filter 0 scanlines. Output depends only on
// the pixel data, so identical rasters encode to identical bytes.
inline ImageBytes png_encode(const Raster& img) {
    if (img.empty()) throw std::invalid_argument("png_encode: empty raster");
    using namespace png_detail;

    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(img.height) * (img.width + 1));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter: none
        const std::uint8_t* row = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
        raw.insert(raw.end(), row, row + img.width);
    }

    uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> deflated(bound);
    if (::compress2(deflated.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw std::runtime_error("png_encode: deflate failed");
    deflated.resize(bound);

    ImageBytes out;
    out.insert(out.end(), kSignature, kSignature + 8);

    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(img.width));
    put_u32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(0);  // color type: grayscale
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // interlace
    write_chunk(out, "IHDR", ihdr);
    write_chunk(out, "IDAT", deflated);
    write_chunk(out, "IEND", {});
    return out;
}

// Decodes 8-bit non-interlaced PNG (grayscale, RGB or RGBA, converted to
// grayscale). Returns nullopt on anything malformed.
inline std::optional<Raster> png_decode(const ImageBytes& bytes) {
    using namespace png_detail;
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0) return std::nullopt;

    std::size_t pos = 8;
    int width = 0, height = 0, channels = 0;
    bool seen_ihdr = false, seen_iend = false;
    std::vector<std::uint8_t> idat;

    while (pos + 12 <= bytes.size()) {
        std::uint32_t len = get_u32(bytes.data() + pos);
        if (pos + 12 + len > bytes.size()) return std::nullopt;
        const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
        const std::uint8_t* payload = bytes.data() + pos + 8;

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) return std::nullopt;
            width = static_cast<int>(get_u32(payload));
            height = static_cast<int>(get_u32(payload + 4));
            int depth = payload[8], color = payload[9], interlace = payload[12];
            if (depth != 8 || interlace != 0) return std::nullopt;
            if (color == 0) channels = 1;
            else if (color == 2) channels = 3;
            else if (color == 6) channels = 4;
            else return std::nullopt;
            if (width <= 0 || height <= 0 || width > 1 << 20 || height > 1 << 20)
                return std::nullopt;
            seen_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            seen_iend = true;
            break;
        }
        pos += 12 + len;
    }
    if (!seen_ihdr || !seen_iend || idat.empty()) return std::nullopt;

    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    const std::size_t raw_size = static_cast<std::size_t>(height) * (stride + 1);
    std::vector<std::uint8_t> raw(raw_size);
    uLongf out_len = static_cast<uLongf>(raw_size);
    if (::uncompress(raw.data(), &out_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        out_len != raw_size)
        return std::nullopt;

    // Undo per-row filters in place.
    std::vector<std::uint8_t> prev(stride, 0);
    Raster img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height);
    std::vector<std::uint8_t> cur(stride);

    for (int y = 0; y < height; ++y) {
        const std::uint8_t* src = raw.data() + static_cast<std::size_t>(y) * (stride + 1);
        std::uint8_t filter = src[0];
        ++src;
        for (std::size_t i = 0; i < stride; ++i) {
            int a = i >= static_cast<std::size_t>(channels) ? cur[i - channels] : 0;
            int b = prev[i];
            int c = i >= static_cast<std::size_t>(channels) ? prev[i - channels] : 0;
            int x = src[i];
            switch (filter) {
                case 0: break;
                case 1: x += a; break;
                case 2: x += b; break;
                case 3: x += (a + b) / 2; break;
                case 4: x += paeth(a, b, c); break;
                default: return std::nullopt;
            }
            cur[i] = static_cast<std::uint8_t>(x & 0xFF);
        }
        for (int x = 0; x < width; ++x) {
            std::uint8_t g;
            if (channels == 1) {
                g = cur[x];
            } else {
                const std::uint8_t* px = cur.data() + static_cast<std::size_t>(x) * channels;
                g = static_cast<std::uint8_t>((299 * px[0] + 587 * px[1] + 114 * px[2]) / 1000);
            }
            img.at(x, y) = g;
        }
        prev = cur;
    }
    return img;
}

}  // namespace copyguard
