#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "deepfuse/classifiers/model.hpp"
#include "deepfuse/random.hpp"

namespace deepfuse {

enum class SplitCriterion { Gini, Entropy };

struct CartParams {
    int max_depth = -1;                 // negative: unlimited
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
    SplitCriterion criterion = SplitCriterion::Gini;
    std::size_t max_features = 0;       // features tried per node; 0 or >= d: all, in natural order
};

/// Weighted impurity of a class-weight histogram.
double impurity(SplitCriterion c, std::span<const double> class_weights);

/// Binary classification tree. Rows go left when x[feature] <= threshold.
class DecisionTree {
public:
    struct Node {
        int feature = -1;        // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        std::vector<double> distribution;  // normalized weighted class distribution
    };

    /// Rows with zero weight are ignored. Sample counts in the params refer
    /// to rows with positive weight. `rng` is needed only when max_features
    /// restricts the candidates.
    static DecisionTree fit(const FeatureMatrix& x, std::span<const int> y, int class_count,
                            std::span<const double> weights, const CartParams& params, Rng* rng);

    std::span<const double> distribution(std::span<const double> row) const;
    int predict(std::span<const double> row) const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    int depth() const;

    void write(BinaryWriter& w) const;
    static DecisionTree read(BinaryReader& r, int class_count, std::size_t feature_count);

private:
    std::vector<Node> nodes_;
};

}  // namespace deepfuse
