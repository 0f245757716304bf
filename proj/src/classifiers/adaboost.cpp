#include "deepfuse/classifiers/adaboost.hpp"

#include <cmath>
#include <numeric>

#include "deepfuse/error.hpp"

namespace deepfuse {

AdaBoostModel::AdaBoostModel(ClassifierSpec spec, int class_count, std::size_t feature_count, std::vector<Round> rounds)
    : FittedModel(std::move(spec), class_count, feature_count), rounds_(std::move(rounds)) {}

std::vector<double> AdaBoostModel::decision_function(const FeatureMatrix& x) const {
    check_features(x);
    const auto k = static_cast<std::size_t>(class_count());
    std::vector<double> out(x.rows() * k, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (const auto& round : rounds_) {
            out[r * k + static_cast<std::size_t>(round.stump.predict(x.row(r)))] += round.alpha;
        }
    }
    return out;
}

std::vector<double> AdaBoostModel::proba_rows(const FeatureMatrix& x) const {
    std::vector<double> dec = decision_function(x);
    const auto k = static_cast<std::size_t>(class_count());
    std::vector<double> row(k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < k; ++c) row[c] = dec[r * k + c] / static_cast<double>(k - 1);
        softmax_inplace(row);
        std::copy(row.begin(), row.end(), dec.begin() + static_cast<std::ptrdiff_t>(r * k));
    }
    return dec;
}

void AdaBoostModel::write_body(BinaryWriter& w) const {
    w.u64(rounds_.size());
    for (const auto& r : rounds_) {
        r.stump.write(w);
        w.f64(r.alpha);
        w.f64(r.error);
    }
}

ModelPtr read_adaboost(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d) {
    const std::uint64_t n = r.u64();
    if (n == 0 || n > 1'000'000) throw FormatError("AdaBoost blob round count out of range");
    std::vector<AdaBoostModel::Round> rounds;
    for (std::uint64_t i = 0; i < n; ++i) {
        AdaBoostModel::Round round{DecisionTree::read(r, k, d), 0.0, 0.0, {}};
        round.alpha = r.f64();
        round.error = r.f64();
        rounds.push_back(std::move(round));
    }
    return std::make_shared<AdaBoostModel>(std::move(spec), k, d, std::move(rounds));
}

ModelPtr fit_adaboost(const LabeledDataset& train, const ClassifierSpec& spec) {
    ParamReader p(spec.family, spec.hyperparams);
    const auto n_estimators = p.get_int("n_estimators");
    const double lr = p.get_real("learning_rate");
    if (n_estimators < 1) throw ConfigError("AdaBoost n_estimators must be at least 1");
    if (!(lr > 0.0)) throw ConfigError("AdaBoost learning_rate must be positive");

    const std::size_t n = train.rows();
    const double k = static_cast<double>(train.class_count());
    const FeatureMatrix& x = train.features();
    const auto& y = train.labels();
    CartParams stump;
    stump.max_depth = 1;

    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<AdaBoostModel::Round> rounds;
    for (std::int64_t m = 0; m < n_estimators; ++m) {
        DecisionTree tree = DecisionTree::fit(x, y, train.class_count(), w, stump, nullptr);
        std::vector<char> miss(n);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            miss[i] = tree.predict(x.row(i)) != y[i];
            if (miss[i]) err += w[i];
        }
        err /= std::accumulate(w.begin(), w.end(), 0.0);
        if (err <= 0.0) {
            rounds.push_back({std::move(tree), 1.0, 0.0, w});
            break;
        }
        if (err >= 1.0 - 1.0 / k) {
            if (rounds.empty()) rounds.push_back({std::move(tree), 1.0, err, w});
            break;
        }
        const double alpha = lr * (std::log((1.0 - err) / err) + std::log(k - 1.0));
        rounds.push_back({std::move(tree), alpha, err, w});
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (miss[i]) w[i] *= std::exp(alpha);
            total += w[i];
        }
        if (!std::isfinite(total) || total <= 0.0) break;
        for (double& v : w) v /= total;
    }
    return std::make_shared<AdaBoostModel>(spec, train.class_count(), train.cols(), std::move(rounds));
}

}  // namespace deepfuse
