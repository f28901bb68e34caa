#pragma once

// Geometric reference construction of the Hilbert curve, built by gluing
// four transformed copies of the previous order. Test-only; shares nothing
// with the bit-manipulation implementation.

#include <cstdint>
#include <utility>
#include <vector>

namespace phishvis::test_support {

using Point = std::pair<std::uint32_t, std::uint32_t>; // (x, y)

inline std::vector<Point> hilbert_points(unsigned order) {
    std::vector<Point> curve{{0, 0}};
    for (unsigned k = 1; k <= order; ++k) {
        const std::uint32_t h = 1u << (k - 1);
        std::vector<Point> next;
        next.reserve(curve.size() * 4);
        for (auto [x, y] : curve) next.emplace_back(y, x);                         // lower-left, transposed
        for (auto [x, y] : curve) next.emplace_back(x, y + h);                     // upper-left
        for (auto [x, y] : curve) next.emplace_back(x + h, y + h);                 // upper-right
        for (auto [x, y] : curve) next.emplace_back(h - 1 - y + h, h - 1 - x);     // lower-right, anti-transposed
        curve = std::move(next);
    }
    return curve;
}

} // namespace phishvis::test_support
