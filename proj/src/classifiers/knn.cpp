#include "deepfuse/classifiers/knn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepfuse/error.hpp"

namespace deepfuse {

double knn_distance(KnnMetric metric, double p, std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    switch (metric) {
        case KnnMetric::Euclidean:
            for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
            return std::sqrt(s);
        case KnnMetric::Manhattan:
            for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
            return s;
        case KnnMetric::Minkowski:
            if (p == 1.0) return knn_distance(KnnMetric::Manhattan, p, a, b);
            if (p == 2.0) return knn_distance(KnnMetric::Euclidean, p, a, b);
            for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), p);
            return std::pow(s, 1.0 / p);
    }
    return s;
}

namespace {

KnnMetric parse_metric(const std::string& s) {
    if (s == "manhattan") return KnnMetric::Manhattan;
    if (s == "minkowski") return KnnMetric::Minkowski;
    return KnnMetric::Euclidean;
}

}  // namespace

KnnModel::KnnModel(ClassifierSpec spec, int class_count, FeatureMatrix train, std::vector<int> labels)
    : FittedModel(std::move(spec), class_count, train.cols()), train_(std::move(train)), labels_(std::move(labels)) {
    ParamReader p(this->spec().family, this->spec().hyperparams);
    const auto k = p.get_int("n_neighbors");
    if (k < 1) throw ConfigError("KNN n_neighbors must be at least 1");
    k_ = static_cast<std::size_t>(k);
    if (k_ > train_.rows()) {
        throw FitError("KNN n_neighbors=" + std::to_string(k_) + " exceeds " + std::to_string(train_.rows()) +
                       " training rows");
    }
    metric_ = parse_metric(p.get_string("metric"));
    p_ = static_cast<double>(p.get_int("p"));
    if (p_ < 1.0) throw ConfigError("KNN p must be at least 1");
    distance_weighted_ = p.get_string("weights") == "distance";
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> query) const {
    std::vector<std::pair<double, std::size_t>> dist(train_.rows());
    for (std::size_t i = 0; i < train_.rows(); ++i) dist[i] = {knn_distance(metric_, p_, query, train_.row(i)), i};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
    std::vector<std::size_t> out(k_);
    for (std::size_t i = 0; i < k_; ++i) out[i] = dist[i].second;
    return out;
}

std::vector<double> KnnModel::proba_rows(const FeatureMatrix& x) const {
    const auto classes = static_cast<std::size_t>(class_count());
    std::vector<double> out(x.rows() * classes, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto query = x.row(r);
        const auto nn = neighbors(query);
        double* votes = out.data() + r * classes;
        bool exact = false;
        if (distance_weighted_) {
            for (std::size_t i : nn) {
                if (knn_distance(metric_, p_, query, train_.row(i)) == 0.0) {
                    votes[labels_[i]] += 1.0;
                    exact = true;
                }
            }
        }
        if (!exact) {
            for (std::size_t i : nn) {
                const double w = distance_weighted_ ? 1.0 / knn_distance(metric_, p_, query, train_.row(i)) : 1.0;
                votes[labels_[i]] += w;
            }
        }
        double total = 0.0;
        for (std::size_t c = 0; c < classes; ++c) total += votes[c];
        for (std::size_t c = 0; c < classes; ++c) votes[c] /= total;
    }
    return out;
}

void KnnModel::write_body(BinaryWriter& w) const {
    w.u64(train_.rows());
    w.reals(std::vector<double>(train_.values().begin(), train_.values().end()));
    w.ints(labels_);
}

ModelPtr read_knn(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d) {
    const std::size_t rows = r.u64();
    auto values = r.reals();
    auto labels = r.ints();
    if (values.size() != rows * d || labels.size() != rows) throw FormatError("KNN blob shape mismatch");
    return std::make_shared<KnnModel>(std::move(spec), k, FeatureMatrix(rows, d, std::move(values)),
                                      std::move(labels));
}

ModelPtr fit_knn(const LabeledDataset& train, const ClassifierSpec& spec) {
    return std::make_shared<KnnModel>(spec, train.class_count(), train.features(), train.labels());
}

}  // namespace deepfuse
