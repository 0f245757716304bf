#include "deepfuse/matrix.hpp"

#include <cmath>
#include <string>

#include "deepfuse/error.hpp"

namespace deepfuse {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows_ == 0 || cols_ == 0) {
        throw ShapeError("feature matrix needs at least one row and one column");
    }
    if (values_.size() != rows_ * cols_) {
        throw ShapeError("feature matrix holds " + std::to_string(values_.size()) + " values, expected " +
                         std::to_string(rows_ * cols_));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw DataError("non-finite value at row " + std::to_string(i / cols_) + ", column " +
                            std::to_string(i % cols_));
        }
    }
}

std::vector<double> FeatureMatrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        out[r] = values_[r * cols_ + c];
    }
    return out;
}

FeatureMatrix FeatureMatrix::take_rows(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * cols_);
    for (std::size_t idx : indices) {
        if (idx >= rows_) {
            throw ShapeError("row index " + std::to_string(idx) + " out of range");
        }
        auto r = row(idx);
        out.insert(out.end(), r.begin(), r.end());
    }
    return FeatureMatrix(indices.size(), cols_, std::move(out));
}

FeatureMatrix FeatureMatrix::slice_columns(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > cols_) {
        throw ShapeError("column slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") out of range for " + std::to_string(cols_) + " columns");
    }
    const std::size_t width = end - begin;
    std::vector<double> out(rows_ * width);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            out[r * width + c] = values_[r * cols_ + begin + c];
        }
    }
    return FeatureMatrix(rows_, width, std::move(out));
}

}  // namespace deepfuse
