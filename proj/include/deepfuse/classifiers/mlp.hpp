#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "deepfuse/classifiers/model.hpp"

namespace deepfuse {

enum class Activation { Relu, Tanh, Logistic };
enum class MlpLoss { SquaredError, CrossEntropy };

/// Fully connected network with a linear output layer.
///
/// Parameters are one flat vector; layer l contributes its weight matrix
/// (fan_in x fan_out, column-major) followed by its bias vector.
class MlpNetwork {
public:
    /// `layers` = input width, hidden widths..., output width.
    MlpNetwork(std::vector<std::size_t> layers, Activation act, MlpLoss loss);

    const std::vector<std::size_t>& layers() const noexcept { return layers_; }
    Activation activation() const noexcept { return act_; }
    MlpLoss loss_kind() const noexcept { return loss_; }

    std::size_t parameter_count() const noexcept { return params_.size(); }
    std::vector<double>& params() noexcept { return params_; }
    const std::vector<double>& params() const noexcept { return params_; }

    /// Glorot-uniform weights, zero biases.
    void initialize(std::uint64_t seed);

    /// Raw output layer, N x width.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

    /// Squared error: (1/N) sum |y - yhat|^2. Cross-entropy: softmax outputs,
    /// -(1/N) sum log p_true. Both add (alpha / 2N) |W|^2 over weights only.
    /// Writes d loss / d params into `grad` when non-null.
    double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& targets, double alpha,
                             std::vector<double>* grad) const;

private:
    std::vector<std::size_t> layers_;
    Activation act_;
    MlpLoss loss_;
    std::vector<double> params_;
    std::vector<std::size_t> offsets_;  // start of each layer's weights
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t t = 0;
};

struct AdamRates {
    double eta = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// One bias-corrected Adam update of `theta` in place.
void adam_step(std::vector<double>& theta, const std::vector<double>& grad, AdamState& state, const AdamRates& r);

class MlpModel final : public FittedModel {
public:
    MlpModel(ClassifierSpec spec, int class_count, std::size_t feature_count, MlpNetwork net,
             std::vector<double> loss_curve);

    const MlpNetwork& network() const noexcept { return net_; }
    const std::vector<double>& loss_curve() const noexcept { return loss_curve_; }

protected:
    std::vector<double> proba_rows(const FeatureMatrix& x) const override;
    void write_body(BinaryWriter& w) const override;

private:
    MlpNetwork net_;
    std::vector<double> loss_curve_;
};

Eigen::MatrixXd to_eigen(const FeatureMatrix& x);

/// One-hot N x K target matrix.
Eigen::MatrixXd one_hot(const std::vector<int>& labels, int class_count);

ModelPtr fit_mlp(const LabeledDataset& train, const ClassifierSpec& spec);

}  // namespace deepfuse
