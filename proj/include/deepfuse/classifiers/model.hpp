#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "deepfuse/classifiers/hyperparams.hpp"
#include "deepfuse/dataset.hpp"
#include "deepfuse/matrix.hpp"

namespace deepfuse {

/// Little-endian binary writer/reader used by model serialization.
class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}
    void u64(std::uint64_t v);
    void i64(std::int64_t v);
    void f64(double v);
    void str(const std::string& s);
    void reals(const std::vector<double>& v);
    void sizes(const std::vector<std::size_t>& v);
    void ints(const std::vector<int>& v);

private:
    std::ostream& out_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::istream& in) : in_(in) {}
    std::uint64_t u64();
    std::int64_t i64();
    double f64();
    std::string str();
    std::vector<double> reals();
    std::vector<std::size_t> sizes();
    std::vector<int> ints();

private:
    std::istream& in_;
};

/// A trained classifier. Immutable; predict and predict_proba are reentrant.
class FittedModel {
public:
    FittedModel(ClassifierSpec spec, int class_count, std::size_t feature_count);
    virtual ~FittedModel() = default;

    const ClassifierSpec& spec() const noexcept { return spec_; }
    Family family() const noexcept { return spec_.family; }
    int class_count() const noexcept { return class_count_; }
    std::size_t feature_count() const noexcept { return feature_count_; }

    /// n x K, each row summing to 1. ShapeError on a column mismatch.
    FeatureMatrix predict_proba(const FeatureMatrix& x) const;

    /// Row-wise argmax of predict_proba, lowest class on ties.
    std::vector<int> predict(const FeatureMatrix& x) const;

    /// Versioned binary blob; restore with load_model.
    void save(std::ostream& out) const;

protected:
    /// Unnormalized-safe: implementations return finite nonnegative rows
    /// that already sum to 1.
    virtual std::vector<double> proba_rows(const FeatureMatrix& x) const = 0;
    virtual void write_body(BinaryWriter& w) const = 0;

    void check_features(const FeatureMatrix& x) const;

private:
    ClassifierSpec spec_;
    int class_count_;
    std::size_t feature_count_;
};

using ModelPtr = std::shared_ptr<const FittedModel>;

/// Validates the ClassifierSpec hyperparameters and dispatches to the family's fit.
/// FitError when the dataset has fewer than two classes.
ModelPtr fit(const LabeledDataset& train, const ClassifierSpec& spec);

ModelPtr load_model(std::istream& in);

/// Fraction of equal entries.
double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted);

/// Softmax of one row in place (max-shifted).
void softmax_inplace(std::vector<double>& v);

}  // namespace deepfuse
