#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace deepfuse {

/// Dense row-major real matrix: rows are samples, columns are features.
///
/// Immutable once constructed. Construction enforces rows >= 1, cols >= 1
/// and that every value is finite (DataError otherwise).
class FeatureMatrix {
public:
    FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const noexcept {
        return {values_.data() + r * cols_, cols_};
    }

    std::span<const double> values() const noexcept { return values_; }

    /// Column `c` copied out.
    std::vector<double> column(std::size_t c) const;

    /// Rows selected by index, in the given order.
    FeatureMatrix take_rows(std::span<const std::size_t> indices) const;

    /// Columns [begin, end).
    FeatureMatrix slice_columns(std::size_t begin, std::size_t end) const;

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

}  // namespace deepfuse
