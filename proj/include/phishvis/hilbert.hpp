#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "phishvis/error.hpp"

namespace phishvis::hilbert {

/// Recursion depth of the curve. An order-k curve covers a 2^k x 2^k grid.
class CurveOrder {
public:
    static constexpr unsigned min_order = 1;
    static constexpr unsigned max_order = 12;
    static constexpr unsigned default_order = 7;

    constexpr CurveOrder() = default;
    constexpr explicit CurveOrder(unsigned k) : k_(k) {
        if (k < min_order || k > max_order) {
            throw Error(ErrorKind::OutOfRange, "curve order " + std::to_string(k) + " outside [1, 12]");
        }
    }

    constexpr unsigned value() const noexcept { return k_; }
    constexpr std::uint32_t side() const noexcept { return std::uint32_t{1} << k_; }
    constexpr std::uint64_t cells() const noexcept { return std::uint64_t{1} << (2 * k_); }

    friend constexpr bool operator==(CurveOrder, CurveOrder) = default;

private:
    unsigned k_ = default_order;
};

struct Cell {
    std::uint32_t x = 0; ///< column
    std::uint32_t y = 0; ///< row

    friend constexpr bool operator==(const Cell&, const Cell&) = default;
};

namespace detail {

// Reflect/transpose a sub-square of side n so the child curve is oriented
// like its parent.
constexpr void rotate(std::uint32_t n, std::uint32_t& x, std::uint32_t& y, std::uint32_t rx, std::uint32_t ry) noexcept {
    if (ry == 0) {
        if (rx == 1) {
            x = n - 1 - x;
            y = n - 1 - y;
        }
        std::swap(x, y);
    }
}

} // namespace detail

/// Cell visited at step `d`. Index 0 is (0,0); the last index is (side-1, 0).
constexpr Cell d2xy(CurveOrder order, std::uint64_t d) {
    if (d >= order.cells()) {
        throw Error(ErrorKind::OutOfRange, "curve index " + std::to_string(d) + " out of range");
    }
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    std::uint64_t t = d;
    for (std::uint32_t s = 1; s < order.side(); s *= 2) {
        const auto rx = static_cast<std::uint32_t>(1 & (t / 2));
        const auto ry = static_cast<std::uint32_t>(1 & (t ^ rx));
        detail::rotate(s, x, y, rx, ry);
        x += s * rx;
        y += s * ry;
        t /= 4;
    }
    return {x, y};
}

constexpr std::uint64_t xy2d(CurveOrder order, Cell cell) {
    const std::uint32_t n = order.side();
    if (cell.x >= n || cell.y >= n) {
        throw Error(ErrorKind::OutOfRange, "cell (" + std::to_string(cell.x) + "," + std::to_string(cell.y) +
                                               ") outside grid of side " + std::to_string(n));
    }
    std::uint32_t x = cell.x;
    std::uint32_t y = cell.y;
    std::uint64_t d = 0;
    for (std::uint32_t s = n / 2; s > 0; s /= 2) {
        const std::uint32_t rx = (x & s) > 0 ? 1 : 0;
        const std::uint32_t ry = (y & s) > 0 ? 1 : 0;
        d += std::uint64_t{s} * s * ((3 * rx) ^ ry);
        detail::rotate(n, x, y, rx, ry);
    }
    return d;
}

} // namespace phishvis::hilbert
