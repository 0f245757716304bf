#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deepfuse/matrix.hpp"

namespace deepfuse {

/// Feature matrix plus dense class labels 0..K-1.
///
/// Invariants (checked on construction, ConsistencyError otherwise):
/// one label per row, every label < K, and every class 0..K-1 present.
class LabeledDataset {
public:
    LabeledDataset(FeatureMatrix features, std::vector<int> labels, int class_count, std::string source_tag);

    const FeatureMatrix& features() const noexcept { return features_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    int class_count() const noexcept { return class_count_; }
    const std::string& source_tag() const noexcept { return source_tag_; }

    std::size_t rows() const noexcept { return features_.rows(); }
    std::size_t cols() const noexcept { return features_.cols(); }

    /// Per-class sample counts, indexed by class id.
    std::vector<std::size_t> class_counts() const;

    /// Subset by row index. The subset must still contain every class.
    LabeledDataset take_rows(std::span<const std::size_t> indices) const;

    /// Same labels and tag, different features (row count must match).
    LabeledDataset with_features(FeatureMatrix features) const;

    LabeledDataset with_tag(std::string tag) const;

private:
    FeatureMatrix features_;
    std::vector<int> labels_;
    int class_count_;
    std::string source_tag_;
};

/// Dense re-encoding of arbitrary integer labels by sorted value order.
struct LabelEncoding {
    std::vector<int> dense;             // one per sample, 0..K-1
    std::vector<std::int64_t> classes;  // original value of each dense id
};
LabelEncoding encode_labels(std::span<const std::int64_t> raw);

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    bool stratified = true;
};

/// Train/test row indices, each sorted ascending.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Per class: floor(fraction * size) to train, then the shortfall against
/// floor(fraction * n) goes one sample at a time to the largest classes.
/// Every class keeps at least one sample on each side.
SplitIndices split_indices(std::span<const int> labels, int class_count, const SplitSpec& spec);

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, const SplitSpec& spec);

/// Column-wise concatenation in input order. Requires identical labels
/// and row order; the tag becomes the input tags joined with "+".
LabeledDataset concat_columns(std::span<const LabeledDataset> sets);

}  // namespace deepfuse
