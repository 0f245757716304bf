#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "deepfuse/ensemble.hpp"
#include "deepfuse/error.hpp"
#include "oracles.hpp"

using namespace deepfuse;

namespace {

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

std::string identity_rule(const std::string& id) { return id; }

EvaluationTable random_table(oracle::Lcg& g, std::size_t rows, std::size_t cols) {
    static const std::vector<std::string> stems{"resnet", "densenet", "vgg", "vit_small_patch16_", "vit_base_patch32_",
                                                "mnasnet", "deit3_small_patch16_"};
    EvaluationTable t;
    for (std::size_t c = 0; c < cols; ++c) t.columns.push_back("c" + std::to_string(c));
    std::set<std::string> used;
    while (t.extractors.size() < rows) {
        const std::string id = stems[g.below(stems.size())] + std::to_string(g.below(4) == 0 ? 224 : 100 + g.below(300));
        if (!used.insert(id).second) continue;
        t.extractors.push_back(id);
        std::vector<double> row;
        for (std::size_t c = 0; c < cols; ++c) row.push_back(static_cast<double>(g.below(9)) / 8.0);
        t.cells.push_back(row);
    }
    return t;
}

}  // namespace

TEST(FamilyKey, Examples) {
    EXPECT_EQ(family_key("resnet50"), "resnet");
    EXPECT_EQ(family_key("resnet101"), "resnet");
    EXPECT_EQ(family_key("densenet169"), "densenet");
    EXPECT_EQ(family_key("vgg16"), "vgg");
    EXPECT_EQ(family_key("mnasnet0_5"), "mnasnet");
    EXPECT_EQ(family_key("vit_small_patch16_224"), "vit_small_patch16");
    EXPECT_EQ(family_key("vit_small_patch16_384"), "vit_small_patch16");
    EXPECT_NE(family_key("vit_small_patch16_224"), family_key("vit_small_patch32_224"));
}

TEST(SelectionReplay, SmallTwoClassTable) {
    const auto t = read_evaluation_csv(oracle::fixture("bt_small_2c.csv"));
    EXPECT_EQ(t.extractors.size(), 25u);
    EXPECT_EQ(t.columns.size(), 9u);
    EXPECT_EQ(as_set(select_top_k(t, 3).ids),
              (std::set<std::string>{"vit_base_patch16_224", "vit_small_patch32_224", "vit_small_patch16_224"}));
}

TEST(SelectionReplay, LargeTwoClassTable) {
    const auto sel = select_top_k(read_evaluation_csv(oracle::fixture("bt_large_2c.csv")), 3);
    EXPECT_EQ(as_set(sel.ids),
              (std::set<std::string>{"vit_large_patch16_224", "vit_base_patch32_384", "vit_small_patch32_384"}));
}

TEST(SelectionReplay, LargeFourClassTable) {
    const auto sel = select_top_k(read_evaluation_csv(oracle::fixture("bt_large_4c.csv")), 3);
    EXPECT_EQ(as_set(sel.ids), (std::set<std::string>{"vgg16", "mnasnet0_5", "vit_small_patch32_224"}));
}

TEST(SelectionReplay, SingleRowIsItsOwnSelection) {
    const auto sel = select_top_k(read_evaluation_csv(oracle::fixture("single_row.csv")), 1);
    EXPECT_EQ(sel.ids, (std::vector<std::string>{"only_row"}));
}

TEST(Selection, EqualMeansPreferLowerStd) {
    EvaluationTable t;
    t.columns = {"x", "y"};
    t.extractors = {"bnet", "anet"};
    t.cells = {{0.85, 0.95}, {0.88, 0.92}};
    EXPECT_EQ(select_top_k(t, 1).ids, (std::vector<std::string>{"anet"}));
}

TEST(Selection, FamilySkipsAreTraced) {
    EvaluationTable t;
    t.columns = {"x"};
    t.extractors = {"resnet50", "resnet101", "vgg16"};
    t.cells = {{0.9}, {0.8}, {0.7}};
    const auto sel = select_top_k(t, 2);
    EXPECT_EQ(sel.ids, (std::vector<std::string>{"resnet50", "vgg16"}));
    ASSERT_EQ(sel.trace.size(), 3u);
    EXPECT_FALSE(sel.trace[1].selected);
    EXPECT_EQ(sel.trace[1].skipped_for, "resnet50");
    EXPECT_THROW(select_top_k(t, 3), SelectionError);
}

TEST(Selection, PropertyDiversityRuleOnlyMattersForSharedFamilies) {
    oracle::Lcg g(31);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto t = random_table(g, 6 + g.below(6), 1 + g.below(5));
        const std::size_t k = 2 + g.below(2);
        Selection with;
        try {
            with = select_top_k(t, k);
        } catch (const SelectionError&) {
            continue;
        }
        const auto without = select_top_k(t, k, identity_rule);
        ASSERT_EQ(with.ids.size(), k);
        std::set<std::string> keys;
        for (const auto& id : with.ids) keys.insert(family_key(id));
        ASSERT_EQ(keys.size(), k);
        if (with.ids != without.ids) {
            std::set<std::string> raw;
            for (const auto& id : without.ids) raw.insert(family_key(id));
            ASSERT_LT(raw.size(), k);
        }
        ++checked;
    }
    EXPECT_GT(checked, 100);
}

TEST(Selection, PropertyInvariantUnderAffineRescaling) {
    oracle::Lcg g(8);
    for (int trial = 0; trial < 200; ++trial) {
        const auto t = random_table(g, 8, 4);
        auto scaled = t;
        for (auto& row : scaled.cells)
            for (double& v : row) v = 0.5 * v + 0.25;
        try {
            EXPECT_EQ(select_top_k(t, 3).ids, select_top_k(scaled, 3).ids);
        } catch (const SelectionError&) {
            EXPECT_THROW(select_top_k(scaled, 3), SelectionError);
        }
    }
}

TEST(EvaluationCsv, RoundTripAndStatistics) {
    EvaluationTable t;
    t.columns = {"XGBoost", "MLP"};
    t.extractors = {"a1", "b2"};
    t.cells = {{0.5, 1.0}, {0.25, 0.75}};
    std::stringstream io;
    write_evaluation_csv(io, t);
    const auto back = read_evaluation_csv(io);
    EXPECT_EQ(back.cells, t.cells);
    EXPECT_EQ(back.extractors, t.extractors);
    EXPECT_EQ(back.columns, t.columns);
    EXPECT_EQ(t.row_mean(0), 0.75);
    EXPECT_EQ(t.row_std(0), 0.25);
    EXPECT_EQ(t.column_mean(1), 0.875);
}

TEST(EvaluationCsv, MalformedInputReportsLine) {
    std::istringstream bad("extractor,A,B\nx,0.5,0.5\ny,0.5,oops\n");
    try {
        read_evaluation_csv(bad);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    std::istringstream range("extractor,A\nx,1.5\n");
    EXPECT_THROW(read_evaluation_csv(range), ParseError);
    std::istringstream ragged("extractor,A,B\nx,0.5\n");
    EXPECT_THROW(read_evaluation_csv(ragged), ParseError);
}

TEST(Fusion, CandidatesArePairsThenTriple) {
    const auto c3 = fusion_candidates(3);
    ASSERT_EQ(c3.size(), 4u);
    EXPECT_EQ(c3[0], (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(c3[1], (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(c3[2], (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(c3[3], (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(fusion_candidates(2).size(), 1u);
}

TEST(Fusion, SameFamilyIsRejectedAndSlicesRecoverSources) {
    const std::vector<int> labels{0, 1, 0, 1};
    const LabeledDataset a(oracle::random_matrix(4, 3, 1), labels, 2, "vgg16");
    const LabeledDataset b(oracle::random_matrix(4, 2, 2), labels, 2, "vit_small_patch16_224");
    const LabeledDataset c(oracle::random_matrix(4, 2, 3), labels, 2, "vgg19");
    const std::vector<LabeledDataset> ok{a, b};
    const auto f = fuse(ok);
    EXPECT_EQ(f.features().slice_columns(0, 3), a.features());
    EXPECT_EQ(f.features().slice_columns(3, 5), b.features());
    const std::vector<LabeledDataset> clash{a, c};
    EXPECT_THROW(fuse(clash), SelectionError);
    const std::vector<LabeledDataset> self{a, a};
    EXPECT_THROW(fuse(self), SelectionError);
}

TEST(Vote, MajorityAndTiePolicy) {
    const std::vector<std::vector<int>> majority{{0}, {0}, {1}};
    const std::vector<std::vector<double>> p3{{0.6, 0.4}, {0.6, 0.4}, {0.1, 0.9}};
    EXPECT_EQ(vote_labels(majority, p3, 2), (std::vector<int>{0}));
    const std::vector<std::vector<int>> split{{0}, {1}};
    EXPECT_EQ(vote_labels(split, {{0.7, 0.3}, {0.5, 0.5}}, 2), (std::vector<int>{0}));  // A: 0.6 vs B: 0.4
    EXPECT_EQ(vote_labels(split, {{0.45, 0.55}, {0.35, 0.65}}, 2), (std::vector<int>{1}));
    EXPECT_EQ(vote_labels(split, {{0.5, 0.5}, {0.5, 0.5}}, 2), (std::vector<int>{0}));
    const std::vector<std::vector<int>> split_rev{{1}, {0}};
    EXPECT_EQ(vote_labels(split_rev, {{0.5, 0.5}, {0.5, 0.5}}, 2), (std::vector<int>{1}));
}

TEST(Vote, PropertyMatchesCountingOracle) {
    oracle::Lcg g(44);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + static_cast<int>(g.below(3));
        const std::size_t n = 20;
        std::vector<std::vector<int>> preds(3, std::vector<int>(n));
        std::vector<std::vector<double>> probas(3, std::vector<double>(n * k));
        for (std::size_t m = 0; m < 3; ++m) {
            for (std::size_t i = 0; i < n; ++i) {
                preds[m][i] = static_cast<int>(g.below(k));
                double total = 0.0;
                for (int c = 0; c < k; ++c) total += probas[m][i * k + c] = static_cast<double>(1 + g.below(4));
                for (int c = 0; c < k; ++c) probas[m][i * k + c] /= total;
            }
        }
        const auto got = vote_labels(preds, probas, k);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<int> mp;
            std::vector<std::vector<double>> pp;
            for (std::size_t m = 0; m < 3; ++m) {
                mp.push_back(preds[m][i]);
                pp.emplace_back(probas[m].begin() + i * k, probas[m].begin() + (i + 1) * k);
            }
            ASSERT_EQ(got[i], oracle::count_vote(mp, pp)) << "trial " << trial << " row " << i;
        }
    }
}

TEST(Vote, UnanimousMembersAgreeWithEachMember) {
    const auto ds = oracle::blobs(60, {{-2, 0}, {2, 0}}, 0.5, 1);
    const auto knn = fit(ds, ClassifierSpec{Family::KNN, {}, 0});
    const auto nb = fit(ds, ClassifierSpec{Family::GaussianNB, {}, 0});
    const auto q = oracle::random_matrix(30, 2, 4);
    EXPECT_EQ(vote_predict({knn, knn, knn}, q), knn->predict(q));
    EXPECT_THROW(vote_predict({knn}, q), ConfigError);
    EXPECT_THROW(vote_predict({knn, nb, knn, nb}, q), ConfigError);
    EXPECT_THROW(vote_predict({knn, nb}, oracle::random_matrix(3, 5, 1)), ShapeError);
}

TEST(Combinations, PairsThenTrio) {
    const std::vector<Family> ranked{Family::SVMRbf, Family::MLP, Family::GBT};
    const auto c = classifier_combinations(ranked);
    ASSERT_EQ(c.size(), 4u);
    EXPECT_EQ(c[0], (std::vector<Family>{Family::SVMRbf, Family::MLP}));
    EXPECT_EQ(c[3], ranked);
}

TEST(TopFamilies, ByColumnMean) {
    const auto t = read_evaluation_csv(oracle::fixture("bt_small_2c.csv"));
    const auto top = top_families(t, 3);
    ASSERT_EQ(top.size(), 3u);
    for (std::size_t i = 1; i < top.size(); ++i) {
        const auto a = std::find(t.columns.begin(), t.columns.end(), table_name(top[i - 1])) - t.columns.begin();
        const auto b = std::find(t.columns.begin(), t.columns.end(), table_name(top[i])) - t.columns.begin();
        EXPECT_GE(t.column_mean(a), t.column_mean(b));
    }
}

TEST(EvaluateFeatureSets, ShapeAndDegenerateCase) {
    const auto signal = oracle::blobs(60, {{-1.5, 0}, {1.5, 0}}, 1.0, 2);
    std::vector<double> noise_vals;
    oracle::Lcg g(3);
    for (std::size_t i = 0; i < 120; ++i) noise_vals.push_back(g.normal());
    const LabeledDataset noise(FeatureMatrix(60, 2, noise_vals), signal.labels(), 2, "noise");
    const std::vector<LabeledDataset> sets{signal.with_tag("signal"), noise};
    EvaluateOptions opt;
    opt.families = {Family::KNN, Family::GaussianNB};
    const auto run = evaluate_feature_sets(sets, opt);
    ASSERT_EQ(run.table.cells.size(), 2u);
    ASSERT_EQ(run.table.cells[0].size(), 2u);
    for (const auto& row : run.table.cells)
        for (double v : row) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
    EXPECT_GT(run.table.row_mean(0), run.table.row_mean(1));

    opt.families = {Family::GaussianNB};
    const std::vector<LabeledDataset> one{sets[0]};
    const auto single = evaluate_feature_sets(one, opt);
    const auto gs = grid_search(sets[0], default_grid(Family::GaussianNB, GridProfile::Compact, 2),
                                GridSearchOptions{5, 0, 1, kDefaultGridCap, {}});
    EXPECT_EQ(single.table.cells[0][0], gs.trials[gs.best_index].mean);
}

TEST(EvaluateFeatureSets, MisalignedLabelsAreRejected) {
    const auto a = oracle::blobs(20, {{0, 0}, {1, 1}}, 1.0, 1);
    auto labels = a.labels();
    std::swap(labels[0], labels[1]);
    const LabeledDataset b(a.features(), labels, 2, "b");
    const std::vector<LabeledDataset> sets{a, b};
    EvaluateOptions opt;
    opt.families = {Family::GaussianNB};
    EXPECT_THROW(evaluate_feature_sets(sets, opt), AlignmentError);
}
