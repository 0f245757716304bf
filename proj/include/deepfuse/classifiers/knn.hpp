#pragma once

#include <span>
#include <vector>

#include "deepfuse/classifiers/model.hpp"

namespace deepfuse {

enum class KnnMetric { Euclidean, Manhattan, Minkowski };

double knn_distance(KnnMetric metric, double p, std::span<const double> a, std::span<const double> b);

class KnnModel final : public FittedModel {
public:
    KnnModel(ClassifierSpec spec, int class_count, FeatureMatrix train, std::vector<int> labels);

    /// Indices of the k nearest training rows to `query`, nearest first,
    /// distance ties broken by lower index.
    std::vector<std::size_t> neighbors(std::span<const double> query) const;

    std::size_t k() const noexcept { return k_; }

protected:
    std::vector<double> proba_rows(const FeatureMatrix& x) const override;
    void write_body(BinaryWriter& w) const override;

private:
    FeatureMatrix train_;
    std::vector<int> labels_;
    std::size_t k_;
    KnnMetric metric_;
    double p_;
    bool distance_weighted_;
};

/// Stores the training set. FitError when n_neighbors exceeds the row count.
ModelPtr fit_knn(const LabeledDataset& train, const ClassifierSpec& spec);

}  // namespace deepfuse
