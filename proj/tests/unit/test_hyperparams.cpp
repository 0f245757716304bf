#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "deepfuse/classifiers/hyperparams.hpp"
#include "deepfuse/error.hpp"
#include "oracles.hpp"

using namespace deepfuse;

TEST(Family, NamesRoundTripInBothSpellings) {
    std::set<std::string> names;
    for (Family f : kAllFamilies) {
        EXPECT_EQ(parse_family(family_name(f)), f);
        EXPECT_EQ(parse_family(table_name(f)), f);
        names.insert(std::string(family_name(f)));
    }
    EXPECT_EQ(names.size(), 9u);
    EXPECT_EQ(table_name(Family::GBT), "XGBoost");
    EXPECT_EQ(table_name(Family::RandomForest), "RFClassifier");
    EXPECT_EQ(table_name(Family::SVMRbf), "SVM_RBF");
    EXPECT_THROW(parse_family("svm"), ConfigError);
}

TEST(HyperValue, FormatsPythonStyle) {
    EXPECT_EQ(format_value(NoneValue{}), "None");
    EXPECT_EQ(format_value(true), "True");
    EXPECT_EQ(format_value(std::int64_t{30}), "30");
    EXPECT_EQ(format_value(0.001), "0.001");
    EXPECT_EQ(format_value(1.0), "1.0");
    EXPECT_EQ(format_value(std::vector<std::int64_t>{50}), "(50,)");
    EXPECT_EQ(format_value(std::vector<std::int64_t>{100, 22}), "(100,22)");
    EXPECT_EQ(format_value(std::vector<double>{0.3, 0.7}), "[0.3,0.7]");
    EXPECT_EQ(format_value(std::string("rbf")), "rbf");
}

TEST(HyperValue, PropertyParseInvertsFormat) {
    oracle::Lcg g(6);
    std::vector<HyperValue> values{NoneValue{}, true, false, std::int64_t{-4}, std::string("tanh"),
                                   std::vector<std::int64_t>{50}, std::vector<std::int64_t>{100, 22, 3},
                                   std::vector<double>{0.3, 0.7}};
    for (int i = 0; i < 200; ++i) values.emplace_back(std::ldexp(g.uniform() + 0.5, static_cast<int>(g.below(40)) - 20));
    for (const auto& v : values) EXPECT_EQ(parse_value(format_value(v)), v) << format_value(v);
}

TEST(HyperParams, FormatJoinsSortedNames) {
    const HyperParams p{{"b", NoneValue{}}, {"a", std::int64_t{1}}};
    EXPECT_EQ(format_params(p), "a=1;b=None");
}

TEST(HyperParams, ValidationRejectsBadInput) {
    EXPECT_THROW(validate_params(Family::KNN, {{"n_neighbours", std::int64_t{3}}}), ConfigError);
    EXPECT_THROW(validate_params(Family::KNN, {{"n_neighbors", std::string("three")}}), ConfigError);
    EXPECT_THROW(validate_params(Family::MLP, {{"activation", std::string("gelu")}}), ConfigError);
    EXPECT_NO_THROW(validate_params(Family::MLP, {{"activation", std::string("tanh")}}));
    EXPECT_NO_THROW(validate_params(Family::SVMRbf, {{"C", std::int64_t{10}}}));  // int accepted for real
    EXPECT_NO_THROW(validate_params(Family::RandomForest, {{"max_depth", NoneValue{}}}));
    EXPECT_NO_THROW(validate_params(Family::GaussianNB, {{"priors", std::vector<double>{0.3, 0.7}}}));
}

TEST(HyperParams, EveryDefaultValidates) {
    for (Family f : kAllFamilies) {
        HyperParams all;
        for (const auto& d : param_space(f)) all[d.name] = d.default_value;
        EXPECT_NO_THROW(validate_params(f, all)) << family_name(f);
    }
}

TEST(HyperParams, ReaderFillsDefaults) {
    const HyperParams p{{"C", std::int64_t{5}}};
    const ParamReader r(Family::SVMRbf, p);
    EXPECT_EQ(r.get_real("C"), 5.0);
    EXPECT_EQ(r.get_real("tol"), 1e-3);
    const ParamReader nb(Family::GaussianNB, {});
    EXPECT_EQ(nb.get_real("var_smoothing"), 1e-9);
    EXPECT_TRUE(nb.is_none("priors"));
}
