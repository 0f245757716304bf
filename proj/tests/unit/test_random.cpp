#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "deepfuse/random.hpp"

using deepfuse::Rng;

TEST(Rng, SameSeedSameStream) {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, DifferentSeedsDiverge) {
    Rng a(1);
    Rng b(2);
    int same = 0;
    for (int i = 0; i < 100; ++i) same += a.next() == b.next();
    EXPECT_EQ(same, 0);
}

TEST(Rng, UniformStaysInHalfOpenUnitInterval) {
    Rng r(7);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000.0, 0.5, 0.01);
}

TEST(Rng, BelowCoversRangeWithoutEscaping) {
    Rng r(9);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto v = r.below(7);
        ASSERT_LT(v, 7u);
        ++hits[v];
    }
    for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, NormalHasUnitMoments) {
    Rng r(11);
    const int n = 200000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsAPermutation) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng r(seed);
        std::vector<int> v(37);
        std::iota(v.begin(), v.end(), 0);
        r.shuffle(v);
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < 37; ++i) ASSERT_EQ(sorted[i], i);
    }
}

TEST(Rng, SampleWithoutReplacementIsDistinct) {
    Rng r(3);
    const auto s = r.sample_without_replacement(50, 20);
    ASSERT_EQ(s.size(), 20u);
    std::set<std::size_t> unique(s.begin(), s.end());
    EXPECT_EQ(unique.size(), 20u);
    for (auto v : s) EXPECT_LT(v, 50u);
}

TEST(Rng, DerivedSeedsAreDistinctAcrossIndices) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(deepfuse::derive_seed(5, i));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_NE(deepfuse::derive_seed(5, 0), deepfuse::derive_seed(6, 0));
}
