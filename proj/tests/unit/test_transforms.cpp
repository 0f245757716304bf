#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "deepfuse/error.hpp"
#include "deepfuse/transforms.hpp"
#include "oracles.hpp"

using namespace deepfuse;

TEST(MinMax, FitsColumnExtremes) {
    const FeatureMatrix x(3, 2, {2, 5, 4, 5, 6, 5});
    const auto s = minmax_fit(x);
    EXPECT_EQ(s.y_min, (std::vector<double>{2, 5}));
    EXPECT_EQ(s.y_max, (std::vector<double>{6, 5}));
    const auto y = minmax_apply(x, s);
    EXPECT_EQ(y.column(0), (std::vector<double>{0, 0.5, 1}));
    EXPECT_EQ(y.column(1), (std::vector<double>{0, 0, 0}));
}

TEST(MinMax, TestValuesAreNotClipped) {
    const MinMaxStats s{{2}, {6}};
    EXPECT_EQ(minmax_apply(FeatureMatrix(1, 1, {8}), s)(0, 0), 1.5);
    EXPECT_EQ(minmax_apply(FeatureMatrix(1, 1, {0}), s)(0, 0), 0.5);
}

TEST(MinMax, ColumnCountMismatchIsShapeError) {
    EXPECT_THROW(minmax_apply(FeatureMatrix(1, 2, {1, 2}), MinMaxStats{{0}, {1}}), ShapeError);
}

TEST(MinMax, PropertyMatchesScanAndHitsExactUnitRange) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto x = oracle::random_matrix(3 + seed % 7, 1 + seed % 5, seed);
        const auto s = minmax_fit(x);
        for (std::size_t c = 0; c < x.cols(); ++c) {
            double lo = x(0, c);
            double hi = x(0, c);
            for (std::size_t r = 1; r < x.rows(); ++r) {
                lo = std::min(lo, x(r, c));
                hi = std::max(hi, x(r, c));
            }
            ASSERT_EQ(s.y_min[c], lo);
            ASSERT_EQ(s.y_max[c], hi);
            const auto col = minmax_apply(x, s).column(c);
            ASSERT_EQ(*std::min_element(col.begin(), col.end()), 0.0);
            ASSERT_EQ(*std::max_element(col.begin(), col.end()), 1.0);
        }
    }
}

TEST(Pca, NeedsTwoRows) { EXPECT_THROW(pca_fit(FeatureMatrix(1, 3, {1, 2, 3})), FitError); }

TEST(Pca, DiagonalLineGivesDiagonalComponent) {
    oracle::Lcg g(3);
    std::vector<double> v;
    for (int i = 0; i < 50; ++i) {
        const double t = g.uniform() * 10.0;
        v.push_back(t + 1e-6 * g.normal());
        v.push_back(t + 1e-6 * g.normal());
    }
    const auto m = pca_fit(FeatureMatrix(50, 2, v));
    ASSERT_EQ(m.output_dim(), 1u);
    const double cosang = std::abs(m.components[0][0] + m.components[0][1]) / std::sqrt(2.0);
    EXPECT_LT(std::acos(std::min(1.0, cosang)), 1e-3);
}

TEST(Pca, IsotropicDataHasSimilarVariances) {
    oracle::Lcg g(5);
    std::vector<double> v(10000 * 4);
    for (double& x : v) x = g.normal();
    const auto m = pca_fit(FeatureMatrix(10000, 4, v));
    ASSERT_EQ(m.output_dim(), 2u);
    EXPECT_LT(std::abs(m.explained_variance[0] - m.explained_variance[1]) / m.explained_variance[1], 0.15);
}

TEST(Pca, OneDimensionalInput) {
    const auto m = pca_fit(FeatureMatrix(3, 1, {1, 2, 4}));
    ASSERT_EQ(m.output_dim(), 1u);
    EXPECT_EQ(std::abs(m.components[0][0]), 1.0);
}

TEST(Pca, MeanProjectsToZero) {
    const auto x = oracle::random_matrix(12, 5, 9);
    const auto m = pca_fit(x);
    const auto p = pca_apply(FeatureMatrix(1, 5, m.mean), m);
    for (double v : p.values()) EXPECT_EQ(v, 0.0);
}

TEST(Pca, PropertyMatchesJacobiOracle) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto x = oracle::random_matrix(10, 6, 100 + seed);
        const auto m = pca_fit(x);
        ASSERT_EQ(m.output_dim(), 3u);
        const auto ref = oracle::jacobi_eigen(oracle::covariance(x));
        for (std::size_t i = 0; i < 3; ++i) {
            ASSERT_NEAR(m.explained_variance[i], ref.values[i], 1e-8);
            double dot = 0.0;
            for (std::size_t j = 0; j < 6; ++j) dot += m.components[i][j] * ref.vectors[i][j];
            ASSERT_NEAR(std::abs(dot), 1.0, 1e-8);
            for (std::size_t k = 0; k < 3; ++k) {
                double ip = 0.0;
                for (std::size_t j = 0; j < 6; ++j) ip += m.components[i][j] * m.components[k][j];
                ASSERT_NEAR(ip, i == k ? 1.0 : 0.0, 1e-8);
            }
        }
        for (std::size_t i = 1; i < 3; ++i) ASSERT_LE(m.explained_variance[i], m.explained_variance[i - 1]);
    }
}

TEST(Pca, ApplyMatchesExplicitProduct) {
    const auto x = oracle::random_matrix(5, 4, 77);
    const auto m = pca_fit(x);
    const auto p = pca_apply(x, m);
    for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t k = 0; k < m.output_dim(); ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < 4; ++j) acc += (x(r, j) - m.mean[j]) * m.components[k][j];
            EXPECT_NEAR(p(r, k), acc, 1e-10);
        }
    }
    EXPECT_THROW(pca_apply(FeatureMatrix(1, 3, {1, 2, 3}), m), ShapeError);
}

TEST(Pca, PropertyProjectionIsAContraction) {
    const auto x = oracle::random_matrix(30, 7, 4);
    const auto m = pca_fit(x);
    const auto p = pca_apply(x, m);
    for (std::size_t a = 0; a < 30; ++a) {
        for (std::size_t b = a + 1; b < 30; ++b) {
            double du = 0.0;
            double dp = 0.0;
            for (std::size_t j = 0; j < 7; ++j) du += std::pow(x(a, j) - x(b, j), 2);
            for (std::size_t j = 0; j < p.cols(); ++j) dp += std::pow(p(a, j) - p(b, j), 2);
            ASSERT_LE(std::sqrt(dp), std::sqrt(du) + 1e-9);
        }
    }
}

namespace {

LabeledDataset imbalanced(std::size_t majority, std::size_t minority, std::size_t d, std::uint64_t seed) {
    const auto n = majority + minority;
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i < minority ? 0 : 1;
    return LabeledDataset(oracle::random_matrix(n, d, seed), labels, 2, "imb");
}

}  // namespace

TEST(Smote, BalancesTumourCounts) {
    const auto ds = imbalanced(155, 98, 4, 1);
    const auto out = smote_oversample(ds, SmoteConfig{5, 3});
    EXPECT_EQ(out.class_counts(), (std::vector<std::size_t>{155, 155}));
}

TEST(Smote, BalancedInputIsUnchanged) {
    const auto ds = imbalanced(20, 20, 3, 2);
    const auto out = smote_oversample(ds, SmoteConfig{});
    EXPECT_EQ(out.features(), ds.features());
    EXPECT_EQ(out.labels(), ds.labels());
}

TEST(Smote, TooFewMinoritySamplesIsConfigError) {
    EXPECT_THROW(smote_oversample(imbalanced(20, 5, 2, 1), SmoteConfig{5, 0}), ConfigError);
    EXPECT_NO_THROW(smote_oversample(imbalanced(20, 6, 2, 1), SmoteConfig{5, 0}));
}

TEST(Smote, PropertySyntheticPointsLieOnNeighbourSegments) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto ds = imbalanced(40 + seed, 10 + seed % 7, 2 + seed % 4, seed);
        const std::size_t k = 1 + seed % 5;
        const auto traced = smote_oversample_traced(ds, SmoteConfig{k, seed});
        const auto& out = traced.data;
        ASSERT_EQ(out.class_counts()[0], out.class_counts()[1]);
        for (std::size_t r = 0; r < ds.rows(); ++r) {
            for (std::size_t c = 0; c < ds.cols(); ++c) ASSERT_EQ(out.features()(r, c), ds.features()(r, c));
        }
        ASSERT_EQ(traced.origins.size(), out.rows() - ds.rows());
        for (std::size_t s = 0; s < traced.origins.size(); ++s) {
            const auto& o = traced.origins[s];
            const int cls = ds.labels()[o.parent];
            ASSERT_EQ(out.labels()[ds.rows() + s], cls);
            ASSERT_GE(o.t, 0.0);
            ASSERT_LE(o.t, 1.0);
            // neighbour must be among the parent's k nearest same-class rows
            std::vector<std::size_t> same;
            std::vector<double> vals;
            for (std::size_t r = 0; r < ds.rows(); ++r) {
                if (ds.labels()[r] != cls || r == o.parent) continue;
                same.push_back(r);
                for (std::size_t c = 0; c < ds.cols(); ++c) vals.push_back(ds.features()(r, c));
            }
            const FeatureMatrix pool(same.size(), ds.cols(), vals);
            const auto nn = oracle::brute_neighbors(pool, ds.features().row(o.parent), k, "euclidean", 2.0);
            bool found = false;
            for (auto i : nn) found = found || same[i] == o.neighbor;
            ASSERT_TRUE(found);
            for (std::size_t c = 0; c < ds.cols(); ++c) {
                const double p = ds.features()(o.parent, c);
                const double q = ds.features()(o.neighbor, c);
                ASSERT_LT(std::abs(out.features()(ds.rows() + s, c) - (p + o.t * (q - p))), 1e-10);
            }
        }
    }
}

TEST(Smote, SameSeedSameRows) {
    const auto ds = imbalanced(30, 12, 3, 8);
    EXPECT_EQ(smote_oversample(ds, SmoteConfig{3, 4}).features(), smote_oversample(ds, SmoteConfig{3, 4}).features());
    EXPECT_NE(smote_oversample(ds, SmoteConfig{3, 4}).features(), smote_oversample(ds, SmoteConfig{3, 5}).features());
}
