#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "deepfuse/dataset.hpp"
#include "deepfuse/matrix.hpp"

namespace deepfuse {

struct MinMaxStats {
    std::vector<double> y_min;
    std::vector<double> y_max;
};

MinMaxStats minmax_fit(const FeatureMatrix& train);

/// |(y - y_min) / (y_max - y_min)| per column. Zero-range columns map to 0.
/// Values outside the training range are not clipped.
FeatureMatrix minmax_apply(const FeatureMatrix& x, const MinMaxStats& s);

struct PCAModel {
    std::vector<double> mean;                // length d
    std::vector<std::vector<double>> components;  // k rows of length d, orthonormal
    std::vector<double> explained_variance;  // length k, nonincreasing

    std::size_t input_dim() const noexcept { return mean.size(); }
    std::size_t output_dim() const noexcept { return components.size(); }
};

/// Keeps the top ceil(d/2) principal directions of the sample covariance
/// (n-1 denominator). Each component is signed so that its entry of largest
/// magnitude is positive. Throws FitError when rows < 2.
PCAModel pca_fit(const FeatureMatrix& train);

/// Centres on the training mean and projects onto the retained components.
FeatureMatrix pca_apply(const FeatureMatrix& x, const PCAModel& m);

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    std::uint64_t seed = 0;
};

/// Where a synthetic row came from: row indices into the input dataset.
struct SyntheticOrigin {
    std::size_t parent;
    std::size_t neighbor;
    double t;
};

struct SmoteResult {
    LabeledDataset data;                  // originals first, then synthetic rows
    std::vector<SyntheticOrigin> origins; // one per synthetic row
};

/// Oversamples every class up to the majority count by interpolating between
/// a random member and one of its k nearest same-class neighbours.
/// Throws ConfigError if a class that needs samples has <= k members.
LabeledDataset smote_oversample(const LabeledDataset& ds, const SmoteConfig& cfg);
SmoteResult smote_oversample_traced(const LabeledDataset& ds, const SmoteConfig& cfg);

/// Indices of the k nearest rows to `row` among `candidates` (excluding
/// `row` itself), Euclidean, ties broken by lower index.
std::vector<std::size_t> nearest_within(const FeatureMatrix& x, std::size_t row,
                                        const std::vector<std::size_t>& candidates, std::size_t k);

}  // namespace deepfuse
