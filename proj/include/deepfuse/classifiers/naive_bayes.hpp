#pragma once

#include <vector>

#include "deepfuse/classifiers/model.hpp"

namespace deepfuse {

class GaussianNBModel final : public FittedModel {
public:
    GaussianNBModel(ClassifierSpec spec, int class_count, std::size_t feature_count, std::vector<double> priors,
                    std::vector<double> means, std::vector<double> variances);

    const std::vector<double>& priors() const noexcept { return priors_; }
    /// K x d row-major.
    const std::vector<double>& means() const noexcept { return means_; }
    const std::vector<double>& variances() const noexcept { return variances_; }

    /// log P(y) + sum_i log p(x_i | y), n x K.
    std::vector<double> joint_log_likelihood(const FeatureMatrix& x) const;

protected:
    std::vector<double> proba_rows(const FeatureMatrix& x) const override;
    void write_body(BinaryWriter& w) const override;

private:
    std::vector<double> priors_;
    std::vector<double> means_;
    std::vector<double> variances_;
};

/// Maximum-likelihood means and variances; every variance is increased by
/// var_smoothing times the largest per-feature variance of the whole set.
/// `priors`, when given, must have K entries summing to 1.
ModelPtr fit_gnb(const LabeledDataset& train, const ClassifierSpec& spec);

}  // namespace deepfuse
