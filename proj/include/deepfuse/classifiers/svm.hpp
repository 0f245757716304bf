#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deepfuse/classifiers/kernel.hpp"
#include "deepfuse/classifiers/model.hpp"

namespace deepfuse {

struct SmoOptions {
    double tol = 1e-3;
    /// Pair updates allowed. Negative: run to tolerance with an internal cap
    /// of 1e6 updates, raising ConvergenceError past it. Positive: stop
    /// quietly after that many updates.
    std::int64_t max_iter = -1;
};

struct SmoSolution {
    std::vector<double> alpha;  // one per training row, 0 <= alpha_i <= C_i
    double bias = 0.0;          // f(x) = sum alpha_i y_i K(x_i, x) + bias
    std::size_t iterations = 0;
    double kkt_gap = 0.0;       // max violating pair gap at exit
};

/// Two-variable dual coordinate ascent with maximal-violating-pair selection.
/// `y` entries are +1/-1; `upper` gives each row's box bound C_i.
SmoSolution solve_smo(const FeatureMatrix& x, std::span<const int> y, std::span<const double> upper,
                      const Kernel& kernel, const SmoOptions& opt);

/// Resolves gamma for a spec: "scale" = 1/(d var(X)), "auto" = 1/d, or the number.
Kernel kernel_for(const ClassifierSpec& spec, const FeatureMatrix& x);

class SvmModel final : public FittedModel {
public:
    struct Submodel {
        std::vector<double> support;  // row-major support vectors
        std::vector<double> coef;     // alpha_n y_n
        double bias = 0.0;
    };

    SvmModel(ClassifierSpec spec, int class_count, std::size_t feature_count, Kernel kernel,
             std::vector<Submodel> submodels);

    /// n x m decision values: m = 1 for two classes (positive = class 1),
    /// otherwise one-vs-rest, one column per class.
    std::vector<double> decision_function(const FeatureMatrix& x) const;

    const Kernel& kernel() const noexcept { return kernel_; }
    const std::vector<Submodel>& submodels() const noexcept { return submodels_; }

protected:
    std::vector<double> proba_rows(const FeatureMatrix& x) const override;
    void write_body(BinaryWriter& w) const override;

private:
    Kernel kernel_;
    std::vector<Submodel> submodels_;
};

ModelPtr fit_svm(const LabeledDataset& train, const ClassifierSpec& spec);

}  // namespace deepfuse
