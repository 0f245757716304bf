// Acceptance gate: one PASS/FAIL line per criterion, each within its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "deepfuse/classifiers/adaboost.hpp"
#include "deepfuse/classifiers/gbt.hpp"
#include "deepfuse/classifiers/knn.hpp"
#include "deepfuse/classifiers/mlp.hpp"
#include "deepfuse/classifiers/svm.hpp"
#include "deepfuse/ensemble.hpp"
#include "deepfuse/error.hpp"
#include "deepfuse/harness.hpp"
#include "deepfuse/imgprep.hpp"
#include "deepfuse/synthetic.hpp"
#include "deepfuse/transforms.hpp"
#include "oracles.hpp"

using namespace deepfuse;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void check(bool cond, const std::string& what) {
        if (!cond) {
            if (ok) detail = what;
            ok = false;
        }
    }
};

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

Outcome selection_replay() {
    Outcome o;
    const auto t4 = select_top_k(read_evaluation_csv(oracle::fixture("bt_small_2c.csv")), 3);
    o.check(as_set(t4.ids) == std::set<std::string>{"vit_base_patch16_224", "vit_small_patch32_224",
                                                       "vit_small_patch16_224"},
            "BT-small-2c trio differs");
    const auto t6 = select_top_k(read_evaluation_csv(oracle::fixture("bt_large_4c.csv")), 3);
    o.check(as_set(t6.ids) == std::set<std::string>{"vgg16", "mnasnet0_5", "vit_small_patch32_224"},
            "BT-large-4c trio differs");
    return o;
}

ClassifierSpec spec(Family f, HyperParams p = {}, std::uint64_t seed = 1) { return ClassifierSpec{f, std::move(p), seed}; }

Outcome classifier_oracles() {
    Outcome o;

    // Gaussian NB against the closed-form posterior.
    {
        const LabeledDataset ds(FeatureMatrix(4, 1, {0, 2, 10, 12}), {0, 0, 1, 1}, 2, "gnb");
        const auto m = fit(ds, spec(Family::GaussianNB));
        const double var = 1.0 + 1e-9 * 26.0;  // class variance 1, pooled variance 26
        for (double q : {1.0, 4.0, 6.0, 9.5}) {
            const double l0 = std::exp(-(q - 1) * (q - 1) / (2 * var));
            const double l1 = std::exp(-(q - 11) * (q - 11) / (2 * var));
            const double ref = l0 / (l0 + l1);
            o.check(std::abs(m->predict_proba(FeatureMatrix(1, 1, {q}))(0, 0) - ref) < 1e-9, "GNB posterior");
        }
    }

    // KNN against exhaustive neighbour scans.
    {
        oracle::Lcg g(17);
        const std::vector<std::string> metrics{"euclidean", "manhattan", "minkowski"};
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t n = 10 + g.below(30);
            const std::size_t d = 1 + g.below(5);
            const auto x = oracle::random_matrix(n, d, g.next());
            std::vector<int> labels(n);
            for (std::size_t i = 0; i < n; ++i) labels[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(g.below(2));
            const std::size_t k = 1 + g.below(std::min<std::size_t>(n, 9));
            const auto& metric = metrics[trial % 3];
            const auto m = fit(LabeledDataset(x, labels, 2, "knn"),
                               spec(Family::KNN, {{"n_neighbors", static_cast<std::int64_t>(k)}, {"metric", metric},
                                                  {"p", std::int64_t{3}}}));
            const auto q = oracle::random_matrix(1, d, g.next());
            const auto got = dynamic_cast<const KnnModel&>(*m).neighbors(q.row(0));
            o.check(got == oracle::brute_neighbors(x, q.row(0), k, metric, 3.0), "KNN neighbours differ");
        }
    }

    // SVM on separable blobs.
    {
        const auto ds = oracle::blobs(80, {{-2.0, -2.0}, {2.0, 2.0}}, 0.5, 3);
        std::vector<int> y;
        for (int l : ds.labels()) y.push_back(l == 1 ? 1 : -1);
        const std::vector<double> upper(ds.rows(), 10.0);
        const Kernel kern{KernelKind::Linear, 1.0, 0.0};
        const auto sol = solve_smo(ds.features(), y, upper, kern, SmoOptions{});
        o.check(oracle::kkt_residual(ds.features(), y, upper, kern, sol) < 1e-3, "SVM KKT residual");
        const auto m = fit(ds, spec(Family::SVMLinear, {{"C", 10.0}}));
        o.check(accuracy(ds.labels(), m->predict(ds.features())) == 1.0, "SVM training accuracy");
    }

    // MLP gradient against central differences.
    {
        MlpNetwork net({3, 6, 2}, Activation::Tanh, MlpLoss::SquaredError);
        net.initialize(5);
        const auto x = to_eigen(oracle::random_matrix(8, 3, 1));
        const auto t = one_hot({0, 1, 0, 1, 1, 0, 0, 1}, 2);
        std::vector<double> grad;
        net.loss_and_gradient(x, t, 1e-4, &grad);
        oracle::Lcg g(2);
        for (int probe = 0; probe < 20; ++probe) {
            const std::size_t i = g.below(net.parameter_count());
            const double keep = net.params()[i];
            net.params()[i] = keep + 1e-6;
            const double up = net.loss_and_gradient(x, t, 1e-4, nullptr);
            net.params()[i] = keep - 1e-6;
            const double down = net.loss_and_gradient(x, t, 1e-4, nullptr);
            net.params()[i] = keep;
            const double numeric = (up - down) / 2e-6;
            const double scale = std::max({std::abs(numeric), std::abs(grad[i]), 1e-6});
            o.check(std::abs(numeric - grad[i]) / scale < 1e-4, "MLP gradient");
        }
    }

    // AdaBoost per-round weighted error.
    {
        const auto ds = oracle::blobs(90, {{0.0, 2.0}, {2.0, -1.0}, {-2.0, -1.0}}, 1.2, 4);
        const auto m = fit(ds, spec(Family::AdaBoost, {{"n_estimators", std::int64_t{30}}}));
        for (const auto& round : dynamic_cast<const AdaBoostModel&>(*m).rounds()) {
            o.check(std::abs(round.error - oracle::weighted_error(round.stump, ds.features(), ds.labels(), round.weights)) <
                        1e-12,
                    "AdaBoost weighted error");
        }
    }

    // GBT training loss monotone at subsample = 1.
    {
        const auto ds = oracle::blobs(100, {{0.0, 0.0}, {1.5, 1.0}}, 1.0, 6);
        const auto m = fit(ds, spec(Family::GBT, {{"n_estimators", std::int64_t{40}}, {"subsample", 1.0}}));
        const auto& h = dynamic_cast<const GbtModel&>(*m).loss_history();
        for (std::size_t i = 1; i < h.size(); ++i) o.check(h[i] <= h[i - 1] + 1e-12, "GBT loss increased");
    }

    // Random forest: one unrestricted tree memorizes distinct samples.
    {
        const auto ds = oracle::blobs(120, {{0.0, 0.0}, {1.0, 1.0}, {2.0, 0.0}}, 1.0, 7);
        const auto m = fit(ds, spec(Family::RandomForest, {{"n_estimators", std::int64_t{1}}, {"bootstrap", false},
                                                           {"max_features", NoneValue{}}}));
        o.check(accuracy(ds.labels(), m->predict(ds.features())) == 1.0, "RF memorization");
    }
    return o;
}

Outcome transform_suite() {
    Outcome o;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = oracle::random_matrix(12, 5, seed);
        const auto y = minmax_apply(x, minmax_fit(x));
        for (std::size_t c = 0; c < 5; ++c) {
            const auto col = y.column(c);
            o.check(*std::min_element(col.begin(), col.end()) == 0.0 && *std::max_element(col.begin(), col.end()) == 1.0,
                    "Min-Max range");
        }
        const auto z = oracle::random_matrix(10, 6, 50 + seed);
        const auto pca = pca_fit(z);
        const auto ref = oracle::jacobi_eigen(oracle::covariance(z));
        for (std::size_t i = 0; i < pca.output_dim(); ++i) {
            o.check(std::abs(pca.explained_variance[i] - ref.values[i]) < 1e-8, "PCA eigenvalue");
            for (std::size_t j = 0; j < pca.output_dim(); ++j) {
                double ip = 0.0;
                for (std::size_t c = 0; c < 6; ++c) ip += pca.components[i][c] * pca.components[j][c];
                o.check(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-8, "PCA orthonormality");
            }
        }
    }
    std::vector<int> labels(253);
    for (std::size_t i = 0; i < 253; ++i) labels[i] = i < 98 ? 0 : 1;
    const LabeledDataset ds(oracle::random_matrix(253, 4, 9), labels, 2, "smote");
    const auto traced = smote_oversample_traced(ds, SmoteConfig{5, 1});
    o.check(traced.data.class_counts() == std::vector<std::size_t>{155, 155}, "SMOTE balance");
    for (std::size_t s = 0; s < traced.origins.size(); ++s) {
        const auto& org = traced.origins[s];
        for (std::size_t c = 0; c < 4; ++c) {
            const double p = ds.features()(org.parent, c);
            const double q = ds.features()(org.neighbor, c);
            o.check(std::abs(traced.data.features()(253 + s, c) - (p + org.t * (q - p))) < 1e-10, "SMOTE segment");
        }
        o.check(org.t >= 0.0 && org.t <= 1.0, "SMOTE t range");
    }
    return o;
}

Outcome grid_search_check() {
    Outcome o;
    const auto ds = oracle::blobs(200, {{0.0, 0.0}, {1.5, 1.0}}, 1.0, 21);
    const std::uint64_t seed = 3;

    const GridSpec knn{Family::KNN, {{"n_neighbors", {std::int64_t{1}, std::int64_t{3}, std::int64_t{5}, std::int64_t{9},
                                                      std::int64_t{15}, std::int64_t{25}}},
                                     {"weights", {std::string("uniform"), std::string("distance")}}}};
    const GridSpec rbf{Family::SVMRbf, {{"C", {0.1, 1.0, 10.0}}, {"gamma", {0.01, 0.1, 1.0, 10.0}}}};
    for (const auto* g : {&knn, &rbf}) {
        std::vector<HyperParams> configs;
        for (const auto& a : g->axes[0].values)
            for (const auto& b : g->axes[1].values) configs.push_back({{g->axes[0].name, a}, {g->axes[1].name, b}});
        GridSearchOptions opt;
        opt.seed = seed;
        const auto serial = grid_search(ds, *g, opt);
        const auto winner = oracle::exhaustive_cv_winner(ds, g->family, configs, 5, seed);
        o.check(serial.best.hyperparams == configs[winner],
                std::string(family_name(g->family)) + " winner differs from the independent loop");
        opt.workers = 4;
        const auto parallel = grid_search(ds, *g, opt);
        bool same = serial.trials.size() == parallel.trials.size();
        for (std::size_t i = 0; same && i < serial.trials.size(); ++i) {
            same = serial.trials[i].params == parallel.trials[i].params &&
                   serial.trials[i].fold_accuracies == parallel.trials[i].fold_accuracies &&
                   serial.trials[i].mean == parallel.trials[i].mean && serial.trials[i].std == parallel.trials[i].std;
        }
        o.check(same, std::string(family_name(g->family)) + " parallel trials differ");
    }
    return o;
}

Outcome end_to_end() {
    Outcome o;
    const auto dir = oracle::temp_dir("acceptance_e2e");
    write_synthetic_fixture(dir / "features", make_synthetic_sets(default_synthetic_extractors(), 600, 2024));
    std::ostringstream info;
    for (std::uint64_t seed : {7u, 8u}) {
        ExperimentConfig cfg;
        cfg.features_dir = dir / "features";
        cfg.k_top = 2;
        cfg.seed = seed;
        cfg.output_dir = dir / ("run_" + std::to_string(seed) + "_a");
        const auto a = run_pipeline(cfg);
        cfg.output_dir = dir / ("run_" + std::to_string(seed) + "_b");
        const auto b = run_pipeline(cfg);

        o.check(as_set(a.selection.ids) == std::set<std::string>{"alphanet", "betanet"}, "selection is not the top two");
        const auto fused_row = std::find(a.ensemble.extractors.begin(), a.ensemble.extractors.end(), "alphanet+betanet");
        o.check(fused_row != a.ensemble.extractors.end(), "no fused row in the ensemble table");
        o.check(a.ensemble.columns.size() == 4, "expected three pairs and one trio of classifiers");
        if (fused_row != a.ensemble.extractors.end() && a.ensemble.columns.size() == 4) {
            const double acc = a.ensemble.cells[static_cast<std::size_t>(fused_row - a.ensemble.extractors.begin())][3];
            info << "seed " << seed << " trio " << a.ensemble.columns[3] << " acc " << acc << "; ";
            o.check(acc >= 0.9, "fused trio vote accuracy below 0.9");
        }
        o.check(a.evaluation.cells == b.evaluation.cells && a.fusion.cells == b.fusion.cells &&
                    a.ensemble.cells == b.ensemble.cells && a.selection.ids == b.selection.ids,
                "reruns differ");
    }
    if (o.ok) o.detail = info.str();
    return o;
}

Outcome crop_contract() {
    Outcome o;
    imgprep::GrayImage img(10, 10, 0);
    for (std::size_t r = 2; r <= 5; ++r)
        for (std::size_t c = 3; c <= 7; ++c) img(r, c) = 255;
    imgprep::CropParams p;
    p.blur_radius = 0;
    p.morph_iterations = 0;
    o.check(imgprep::find_crop_bounds(img, p) == imgprep::CropBounds{2, 5, 3, 7}, "rectangle bounds");

    const imgprep::GrayImage blank(10, 10, 0);
    bool raised = false;
    try {
        imgprep::crop_extreme_points(blank, imgprep::CropParams{});
    } catch (const CropError&) {
        raised = true;
    }
    o.check(raised, "empty image did not raise a crop error");
    bool cropped = true;
    imgprep::CropParams q;
    q.target_size = {16, 16};
    const auto fallback = imgprep::prepare(blank, q, &cropped);
    o.check(!cropped && fallback == imgprep::resize_bicubic(blank, {16, 16}), "fallback is not a whole-image resize");
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"selection fixture replay (BT-small-2c, BT-large-4c)", 1.0, selection_replay},
        {"classifier oracle suite", 120.0, classifier_oracles},
        {"transform suite", 30.0, transform_suite},
        {"grid-search correctness (KNN, SVM-RBF, parallel)", 180.0, grid_search_check},
        {"end-to-end synthetic double ensemble", 300.0, end_to_end},
        {"crop contract", 1.0, crop_contract},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.ok = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (out.ok && secs > c.budget_seconds) {
            out.ok = false;
            out.detail = "over time budget";
        }
        failures += !out.ok;
        std::printf("%s %s (%.2fs / %.0fs budget)%s%s\n", out.ok ? "PASS" : "FAIL", c.name, secs, c.budget_seconds,
                    out.detail.empty() ? "" : ": ", out.detail.c_str());
    }
    return failures == 0 ? 0 : 1;
}
