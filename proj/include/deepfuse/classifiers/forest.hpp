#pragma once

#include <optional>
#include <vector>

#include "deepfuse/classifiers/cart.hpp"
#include "deepfuse/classifiers/model.hpp"

namespace deepfuse {

/// Features tried per split for a max_features value and d input columns:
/// sqrt/auto -> floor(sqrt d), log2 -> floor(log2 d), None -> d, an integer
/// as given, a fraction -> floor(f d); always at least 1.
std::size_t resolve_max_features(const HyperValue& v, std::size_t d);

class ForestModel final : public FittedModel {
public:
    ForestModel(ClassifierSpec spec, int class_count, std::size_t feature_count, std::vector<DecisionTree> trees,
                std::optional<double> oob_score);

    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

    /// Out-of-bag accuracy when oob_score was requested with bootstrapping.
    std::optional<double> oob_score() const noexcept { return oob_score_; }

protected:
    /// Fraction of trees voting for each class.
    std::vector<double> proba_rows(const FeatureMatrix& x) const override;
    void write_body(BinaryWriter& w) const override;

private:
    std::vector<DecisionTree> trees_;
    std::optional<double> oob_score_;
};

ModelPtr fit_forest(const LabeledDataset& train, const ClassifierSpec& spec);

}  // namespace deepfuse
