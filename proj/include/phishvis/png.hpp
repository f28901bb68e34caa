#pragma once

// Minimal PNG codec for square 8-bit RGB rasters.
//
// Output is always colour type 2, bit depth 8, no interlace, filter 0 on
// every row, and a single IDAT compressed with zlib at png_compression_level.
// Identical images therefore encode to identical bytes for a given zlib build.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <string_view>

#include <zlib.h>

#include "phishvis/bytevis.hpp"
#include "phishvis/error.hpp"
#include "phishvis/io.hpp"

namespace phishvis {

inline constexpr int png_compression_level = 9;

namespace png_detail {

inline constexpr std::array<std::uint8_t, 8> signature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

inline void put_u32(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

inline void put_chunk(Bytes& out, std::string_view type, ByteView data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t type_pos = out.size();
    out.insert(out.end(), type.begin(), type.end());
    out.insert(out.end(), data.begin(), data.end());
    const auto crc = crc32(0L, out.data() + type_pos, static_cast<uInt>(out.size() - type_pos));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

[[noreturn]] inline void corrupt(const std::string& why) {
    throw Error(ErrorKind::StoreCorrupt, "invalid PNG: " + why);
}

inline std::uint8_t paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a);
    const int pb = std::abs(p - b);
    const int pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
    if (pb <= pc) return static_cast<std::uint8_t>(b);
    return static_cast<std::uint8_t>(c);
}

} // namespace png_detail

inline Bytes encode_png(const VisImage& img) {
    using namespace png_detail;
    if (!img.valid()) {
        throw Error(ErrorKind::BadShape, "image pixel count does not match side");
    }
    const std::size_t stride = std::size_t{img.side} * 3;
    Bytes raw;
    raw.reserve((stride + 1) * img.side);
    for (std::uint32_t y = 0; y < img.side; ++y) {
        raw.push_back(0);
        for (std::uint32_t x = 0; x < img.side; ++x) {
            const Rgb& p = img.at(x, y);
            raw.push_back(p.r);
            raw.push_back(p.g);
            raw.push_back(p.b);
        }
    }

    uLongf packed_len = compressBound(static_cast<uLong>(raw.size()));
    Bytes packed(packed_len);
    if (compress2(packed.data(), &packed_len, raw.data(), static_cast<uLong>(raw.size()), png_compression_level) != Z_OK) {
        throw Error(ErrorKind::InvalidInput, "zlib compression failed");
    }
    packed.resize(packed_len);

    Bytes out(signature.begin(), signature.end());
    Bytes ihdr;
    put_u32(ihdr, img.side);
    put_u32(ihdr, img.side);
    ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0}); // depth, colour type, compression, filter, interlace
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", packed);
    put_chunk(out, "IEND", {});
    return out;
}

/// Decodes square 8-bit RGB PNGs (all five row filters). Anything else is
/// rejected as StoreCorrupt.
inline VisImage decode_png(ByteView data) {
    using namespace png_detail;
    if (data.size() < signature.size() || !std::equal(signature.begin(), signature.end(), data.begin())) {
        corrupt("bad signature");
    }
    std::size_t pos = signature.size();
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    bool seen_header = false;
    bool seen_end = false;
    Bytes packed;
    while (!seen_end) {
        if (pos + 12 > data.size()) corrupt("truncated chunk");
        const std::uint32_t len = get_u32(data.data() + pos);
        if (len > data.size() - pos - 12) corrupt("chunk length exceeds file");
        const std::string_view type(reinterpret_cast<const char*>(data.data() + pos + 4), 4);
        const std::uint8_t* body = data.data() + pos + 8;
        const auto crc = crc32(0L, data.data() + pos + 4, len + 4);
        if (static_cast<std::uint32_t>(crc) != get_u32(body + len)) corrupt("CRC mismatch in " + std::string(type));
        if (type == "IHDR") {
            if (len != 13) corrupt("bad IHDR length");
            width = get_u32(body);
            height = get_u32(body + 4);
            if (body[8] != 8 || body[9] != 2 || body[10] != 0 || body[11] != 0 || body[12] != 0) {
                corrupt("only 8-bit non-interlaced RGB is supported");
            }
            seen_header = true;
        } else if (type == "IDAT") {
            packed.insert(packed.end(), body, body + len);
        } else if (type == "IEND") {
            seen_end = true;
        }
        pos += std::size_t{len} + 12;
    }
    if (!seen_header) corrupt("missing IHDR");
    if (width != height || width == 0 || width > 4096) corrupt("image must be square with side in [1, 4096]");

    const std::size_t stride = std::size_t{width} * 3;
    Bytes raw((stride + 1) * height);
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_len, packed.data(), static_cast<uLong>(packed.size())) != Z_OK || raw_len != raw.size()) {
        corrupt("bad image data stream");
    }

    VisImage img(width);
    Bytes prev(stride, 0);
    Bytes cur(stride);
    for (std::uint32_t y = 0; y < height; ++y) {
        const std::uint8_t* row = raw.data() + y * (stride + 1);
        const std::uint8_t filter = row[0];
        for (std::size_t i = 0; i < stride; ++i) {
            const int a = i >= 3 ? cur[i - 3] : 0;
            const int b = prev[i];
            const int c = i >= 3 ? prev[i - 3] : 0;
            int pred = 0;
            switch (filter) {
            case 0: pred = 0; break;
            case 1: pred = a; break;
            case 2: pred = b; break;
            case 3: pred = (a + b) / 2; break;
            case 4: pred = paeth(a, b, c); break;
            default: corrupt("unknown row filter");
            }
            cur[i] = static_cast<std::uint8_t>(row[1 + i] + pred);
        }
        for (std::uint32_t x = 0; x < width; ++x) {
            img.at(x, y) = {cur[3 * x], cur[3 * x + 1], cur[3 * x + 2]};
        }
        std::swap(prev, cur);
    }
    return img;
}

inline VisImage load_png(const std::filesystem::path& path) {
    const Bytes data = read_file(path);
    return decode_png(data);
}

} // namespace phishvis
