#pragma once

#include <vector>

#include "deepfuse/classifiers/cart.hpp"
#include "deepfuse/classifiers/model.hpp"

namespace deepfuse {

class AdaBoostModel final : public FittedModel {
public:
    struct Round {
        DecisionTree stump;
        double alpha = 0.0;
        double error = 0.0;                 // weighted training error of this stump
        std::vector<double> weights;        // normalized sample weights the stump was fit on
    };

    AdaBoostModel(ClassifierSpec spec, int class_count, std::size_t feature_count, std::vector<Round> rounds);

    const std::vector<Round>& rounds() const noexcept { return rounds_; }

    /// n x K: sum of alpha over stumps voting for each class.
    std::vector<double> decision_function(const FeatureMatrix& x) const;

protected:
    /// softmax(decision / (K - 1)) per row.
    std::vector<double> proba_rows(const FeatureMatrix& x) const override;
    void write_body(BinaryWriter& w) const override;

private:
    std::vector<Round> rounds_;
};

/// SAMME boosting of depth-1 trees. Stops early on a perfect stump (kept
/// with alpha 1) or on one no better than chance (dropped, unless it is the
/// first, which is then kept with alpha 1).
ModelPtr fit_adaboost(const LabeledDataset& train, const ClassifierSpec& spec);

}  // namespace deepfuse
