#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "phishvis/error.hpp"
#include "phishvis/hilbert.hpp"

namespace phishvis {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Partition of the 256 byte values used to colour the image.
enum class ByteClass : std::uint8_t {
    Null,      ///< 0x00
    Printable, ///< 0x20-0x7E
    Control,   ///< 0x01-0x1F and 0x7F
    Extended,  ///< 0x80-0xFE
    Max,       ///< 0xFF
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

/// Square RGB raster, row-major.
struct VisImage {
    std::uint32_t side = 0;
    std::vector<Rgb> pixels;

    VisImage() = default;
    explicit VisImage(std::uint32_t s) : side(s), pixels(std::size_t{s} * s) {}

    Rgb& at(std::uint32_t x, std::uint32_t y) { return pixels[std::size_t{y} * side + x]; }
    const Rgb& at(std::uint32_t x, std::uint32_t y) const { return pixels[std::size_t{y} * side + x]; }

    bool valid() const noexcept { return side > 0 && pixels.size() == std::size_t{side} * side; }

    friend bool operator==(const VisImage&, const VisImage&) = default;
};

constexpr ByteClass classify_byte(std::uint8_t b) noexcept {
    if (b == 0x00) return ByteClass::Null;
    if (b == 0xFF) return ByteClass::Max;
    if (b < 0x20 || b == 0x7F) return ByteClass::Control;
    if (b < 0x7F) return ByteClass::Printable;
    return ByteClass::Extended;
}

constexpr Rgb class_color(ByteClass c) noexcept {
    switch (c) {
    case ByteClass::Null: return {0, 0, 0};
    case ByteClass::Max: return {255, 255, 255};
    case ByteClass::Printable: return {0, 0, 255};
    case ByteClass::Control: return {0, 255, 0};
    case ByteClass::Extended: return {255, 0, 0};
    }
    return {};
}

constexpr Rgb byte_to_rgb(std::uint8_t b) noexcept { return class_color(classify_byte(b)); }

/// Fit a stream of any non-zero length onto exactly `n_cells` bytes.
/// Long streams are index-sampled (cell c takes byte floor(c*L/n)); short
/// streams are copied and padded with 0x00.
inline Bytes sample_stream(ByteView bytes, std::uint64_t n_cells) {
    if (bytes.empty()) {
        throw Error(ErrorKind::EmptyContent, "cannot visualise an empty byte stream");
    }
    const std::uint64_t len = bytes.size();
    Bytes out(n_cells, 0x00);
    if (len >= n_cells) {
        for (std::uint64_t c = 0; c < n_cells; ++c) {
            out[c] = bytes[c * len / n_cells];
        }
    } else {
        std::copy(bytes.begin(), bytes.end(), out.begin());
    }
    return out;
}

inline VisImage render(ByteView bytes, hilbert::CurveOrder order = hilbert::CurveOrder{}) {
    const Bytes cells = sample_stream(bytes, order.cells());
    VisImage img(order.side());
    for (std::uint64_t d = 0; d < cells.size(); ++d) {
        const auto cell = hilbert::d2xy(order, d);
        img.at(cell.x, cell.y) = byte_to_rgb(cells[d]);
    }
    return img;
}

} // namespace phishvis
