#include <gtest/gtest.h>

#include <set>

#include "sfps/core.hpp"

using namespace sfps;

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DifferentSeedsDiffer) {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
    EXPECT_EQ(same, 0);
}

TEST(Rng, UniformInUnitInterval) {
    Rng r(3);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 20000.0, 0.5, 0.01);
}

TEST(Rng, UniformIntCoversInclusiveRange) {
    Rng r(4);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const auto v = r.uniform_int(-2, 3);
        ASSERT_GE(v, -2);
        ASSERT_LE(v, 3);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 6u);
    EXPECT_EQ(r.uniform_int(7, 7), 7);
}

TEST(Rng, NormalMoments) {
    Rng r(5);
    double s = 0.0, ss = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        ss += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.02);
    EXPECT_NEAR(ss / n, 1.0, 0.03);
}

TEST(MixSeed, DistinctStreams) {
    EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
    EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
    EXPECT_EQ(mix_seed(9, 3), mix_seed(9, 3));
}

TEST(DroneModeNames, RoundTrip) {
    for (auto m : kAllDroneModes) EXPECT_EQ(drone_mode_from_string(to_string(m)), m);
    EXPECT_THROW(drone_mode_from_string("FLYING"), ConfigError);
}

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.0), "0");
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(format_double(100.0), "100");
    const double v = 0.1 + 0.2;
    EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Require, ThrowsTypedErrors) {
    EXPECT_THROW(require(false, "x"), Error);
    EXPECT_THROW(require_config(false, "x"), ConfigError);
    EXPECT_NO_THROW(require(true, "x"));
}
