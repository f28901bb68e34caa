#include <set>

#include <gtest/gtest.h>

#include "hilbert_oracle.hpp"
#include "phishvis/hilbert.hpp"

using namespace phishvis;
using namespace phishvis::hilbert;

TEST(Hilbert, OrderBounds) {
    EXPECT_THROW(CurveOrder(0), Error);
    EXPECT_THROW(CurveOrder(13), Error);
    EXPECT_EQ(CurveOrder{}.value(), 7u);
    EXPECT_EQ(CurveOrder{}.side(), 128u);
    for (unsigned k = 1; k <= 12; ++k) {
        const CurveOrder o(k);
        EXPECT_EQ(std::uint64_t{o.side()} * o.side(), o.cells());
    }
}

TEST(Hilbert, KnownPoints) {
    EXPECT_EQ(d2xy(CurveOrder(1), 0), (Cell{0, 0}));
    EXPECT_EQ(d2xy(CurveOrder(1), 3), (Cell{1, 0}));
    EXPECT_EQ(d2xy(CurveOrder(2), 15), (Cell{3, 0}));
    EXPECT_EQ(xy2d(CurveOrder(1), {0, 0}), 0u);
    EXPECT_EQ(xy2d(CurveOrder(1), {1, 0}), 3u);
}

TEST(Hilbert, MatchesRecursiveConstruction) {
    for (unsigned k = 1; k <= 6; ++k) {
        const auto ref = test_support::hilbert_points(k);
        const CurveOrder o(k);
        ASSERT_EQ(ref.size(), o.cells());
        for (std::uint64_t d = 0; d < ref.size(); ++d) {
            const Cell c = d2xy(o, d);
            ASSERT_EQ(c.x, ref[d].first) << "k=" << k << " d=" << d;
            ASSERT_EQ(c.y, ref[d].second) << "k=" << k << " d=" << d;
        }
    }
}

TEST(Hilbert, OutOfRange) {
    EXPECT_THROW(d2xy(CurveOrder(1), 4), Error);
    EXPECT_THROW(xy2d(CurveOrder(1), {2, 0}), Error);
    EXPECT_THROW(xy2d(CurveOrder(3), {0, 8}), Error);
    try {
        d2xy(CurveOrder(2), 16);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::OutOfRange);
    }
}

TEST(Hilbert, Order3Roundtrip) {
    const CurveOrder o(3);
    for (std::uint32_t y = 0; y < 8; ++y) {
        for (std::uint32_t x = 0; x < 8; ++x) {
            EXPECT_EQ(d2xy(o, xy2d(o, {x, y})), (Cell{x, y}));
        }
    }
}

TEST(Hilbert, ExhaustivePropertiesUpToOrder7) {
    for (unsigned k = 1; k <= 7; ++k) {
        const CurveOrder o(k);
        std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
        Cell prev{};
        for (std::uint64_t d = 0; d < o.cells(); ++d) {
            const Cell c = d2xy(o, d);
            ASSERT_LT(c.x, o.side());
            ASSERT_LT(c.y, o.side());
            ASSERT_EQ(xy2d(o, c), d);
            seen.emplace(c.x, c.y);
            if (d > 0) {
                const auto dist = (c.x > prev.x ? c.x - prev.x : prev.x - c.x) + (c.y > prev.y ? c.y - prev.y : prev.y - c.y);
                ASSERT_EQ(dist, 1u) << "k=" << k << " d=" << d;
            }
            prev = c;
        }
        EXPECT_EQ(seen.size(), o.cells());
        EXPECT_EQ(d2xy(o, 0), (Cell{0, 0}));
        EXPECT_EQ(d2xy(o, o.cells() - 1).y, 0u);
    }
}

TEST(Hilbert, LargestOrderSpotCheck) {
    const CurveOrder o(12);
    for (std::uint64_t d : {std::uint64_t{0}, std::uint64_t{12345}, o.cells() / 2, o.cells() - 1}) {
        EXPECT_EQ(xy2d(o, d2xy(o, d)), d);
    }
}
