#include "deepfuse/classifiers/naive_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "deepfuse/error.hpp"

namespace deepfuse {

GaussianNBModel::GaussianNBModel(ClassifierSpec spec, int class_count, std::size_t feature_count,
                                 std::vector<double> priors, std::vector<double> means, std::vector<double> variances)
    : FittedModel(std::move(spec), class_count, feature_count),
      priors_(std::move(priors)),
      means_(std::move(means)),
      variances_(std::move(variances)) {}

std::vector<double> GaussianNBModel::joint_log_likelihood(const FeatureMatrix& x) const {
    check_features(x);
    const auto k = static_cast<std::size_t>(class_count());
    const std::size_t d = feature_count();
    std::vector<double> out(x.rows() * k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        for (std::size_t c = 0; c < k; ++c) {
            double ll = std::log(priors_[c]);
            for (std::size_t j = 0; j < d; ++j) {
                const double var = variances_[c * d + j];
                const double diff = row[j] - means_[c * d + j];
                ll -= 0.5 * std::log(2.0 * std::numbers::pi * var) + diff * diff / (2.0 * var);
            }
            out[r * k + c] = ll;
        }
    }
    return out;
}

std::vector<double> GaussianNBModel::proba_rows(const FeatureMatrix& x) const {
    std::vector<double> jll = joint_log_likelihood(x);
    const auto k = static_cast<std::size_t>(class_count());
    std::vector<double> row(k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::copy_n(jll.begin() + static_cast<std::ptrdiff_t>(r * k), k, row.begin());
        softmax_inplace(row);
        std::copy(row.begin(), row.end(), jll.begin() + static_cast<std::ptrdiff_t>(r * k));
    }
    return jll;
}

void GaussianNBModel::write_body(BinaryWriter& w) const {
    w.reals(priors_);
    w.reals(means_);
    w.reals(variances_);
}

ModelPtr read_gnb(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d) {
    auto priors = r.reals();
    auto means = r.reals();
    auto vars = r.reals();
    const auto kk = static_cast<std::size_t>(k);
    if (priors.size() != kk || means.size() != kk * d || vars.size() != kk * d) {
        throw FormatError("GaussianNB blob shape mismatch");
    }
    return std::make_shared<GaussianNBModel>(std::move(spec), k, d, std::move(priors), std::move(means),
                                             std::move(vars));
}

ModelPtr fit_gnb(const LabeledDataset& train, const ClassifierSpec& spec) {
    ParamReader p(spec.family, spec.hyperparams);
    const double smoothing = p.get_real("var_smoothing");
    if (smoothing < 0.0) throw ConfigError("GaussianNB var_smoothing must be nonnegative");
    const auto k = static_cast<std::size_t>(train.class_count());
    const std::size_t n = train.rows();
    const std::size_t d = train.cols();
    const auto counts = train.class_counts();
    const FeatureMatrix& x = train.features();

    std::vector<double> priors(k);
    if (p.is_none("priors")) {
        for (std::size_t c = 0; c < k; ++c) priors[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
    } else {
        priors = p.get_real_list("priors");
        if (priors.size() != k) {
            throw ConfigError("GaussianNB priors has " + std::to_string(priors.size()) + " entries for " +
                              std::to_string(k) + " classes");
        }
        double total = 0.0;
        for (double v : priors) {
            if (!(v > 0.0)) throw ConfigError("GaussianNB priors must be positive");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-6) throw ConfigError("GaussianNB priors must sum to 1");
    }

    // Largest per-feature variance over the whole training set.
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
        max_var = std::max(max_var, var / static_cast<double>(n));
    }
    double epsilon = smoothing * max_var;
    if (!(epsilon > 0.0)) epsilon = std::max(smoothing, 1e-300);

    std::vector<double> means(k * d, 0.0);
    std::vector<double> vars(k * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(train.labels()[i]);
        for (std::size_t j = 0; j < d; ++j) means[c * d + j] += x(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) means[c * d + j] /= static_cast<double>(counts[c]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(train.labels()[i]);
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = x(i, j) - means[c * d + j];
            vars[c * d + j] += diff * diff;
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) {
            vars[c * d + j] = vars[c * d + j] / static_cast<double>(counts[c]) + epsilon;
        }
    }
    return std::make_shared<GaussianNBModel>(spec, static_cast<int>(k), d, std::move(priors), std::move(means),
                                             std::move(vars));
}

}  // namespace deepfuse
