#pragma once

#include <span>
#include <vector>

#include "deepfuse/classifiers/model.hpp"

namespace deepfuse {

struct RegressionTreeParams {
    int max_depth = 6;
    double lambda = 1.0;
    double min_child_weight = 1.0;
    double learning_rate = 0.3;  // folded into the leaf values
};

/// Second-order regression tree: splits maximize
/// G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l); leaves hold -lr G/(H+l).
class RegressionTree {
public:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };

    static RegressionTree fit(const FeatureMatrix& x, std::span<const double> grad, std::span<const double> hess,
                              std::vector<std::size_t> rows, const RegressionTreeParams& p);

    double predict(std::span<const double> row) const;
    const std::vector<Node>& nodes() const noexcept { return nodes_; }

    void write(BinaryWriter& w) const;
    static RegressionTree read(BinaryReader& r, std::size_t feature_count);

private:
    std::vector<Node> nodes_;
};

class GbtModel final : public FittedModel {
public:
    /// `base` has one entry for two classes (log-odds of class 1) and K
    /// entries otherwise (log priors). Each stage holds as many trees.
    GbtModel(ClassifierSpec spec, int class_count, std::size_t feature_count, std::vector<double> base,
             std::vector<std::vector<RegressionTree>> stages, std::vector<double> loss_history);

    /// n x m raw additive scores.
    std::vector<double> raw_scores(const FeatureMatrix& x) const;

    const std::vector<std::vector<RegressionTree>>& stages() const noexcept { return stages_; }

    /// Mean training log-loss before the first stage and after every stage.
    const std::vector<double>& loss_history() const noexcept { return loss_history_; }

protected:
    std::vector<double> proba_rows(const FeatureMatrix& x) const override;
    void write_body(BinaryWriter& w) const override;

private:
    std::vector<double> base_;
    std::vector<std::vector<RegressionTree>> stages_;
    std::vector<double> loss_history_;
};

ModelPtr fit_gbt(const LabeledDataset& train, const ClassifierSpec& spec);

}  // namespace deepfuse
