#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deepfuse {

/// Coarse error category; the CLI maps it onto process exit codes.
enum class ErrorCategory {
    Config,   // bad configuration or hyperparameters (exit 2)
    Data,     // malformed or inconsistent input data (exit 3)
    Runtime,  // everything else (exit 1)
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

// Data-side errors.
struct FormatError : Error {
    explicit FormatError(const std::string& w) : Error(ErrorCategory::Data, "format error: " + w) {}
};
struct ConsistencyError : Error {
    explicit ConsistencyError(const std::string& w) : Error(ErrorCategory::Data, "consistency error: " + w) {}
};
struct DataError : Error {
    explicit DataError(const std::string& w) : Error(ErrorCategory::Data, "data error: " + w) {}
};
struct AlignmentError : Error {
    explicit AlignmentError(const std::string& w) : Error(ErrorCategory::Data, "alignment error: " + w) {}
};
struct SplitError : Error {
    explicit SplitError(const std::string& w) : Error(ErrorCategory::Data, "split error: " + w) {}
};
struct FoldError : Error {
    FoldError(int class_id, std::size_t count, std::size_t folds)
        : Error(ErrorCategory::Data, "fold error: class " + std::to_string(class_id) + " has " +
                                         std::to_string(count) + " samples, fewer than " +
                                         std::to_string(folds) + " folds"),
          class_id(class_id), count(count) {}
    int class_id;
    std::size_t count;
};
struct ParseError : Error {
    ParseError(std::size_t line, const std::string& w)
        : Error(ErrorCategory::Data, "parse error at line " + std::to_string(line) + ": " + w), line(line) {}
    std::size_t line;
};
struct CropError : Error {
    explicit CropError(const std::string& w) : Error(ErrorCategory::Data, "crop error: " + w) {}
};

// Shape mismatches are caller bugs more often than bad files.
struct ShapeError : Error {
    explicit ShapeError(const std::string& w) : Error(ErrorCategory::Runtime, "shape error: " + w) {}
};

// Configuration-side errors.
struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorCategory::Config, "config error: " + w) {}
};
struct SizeError : Error {
    explicit SizeError(const std::string& w) : Error(ErrorCategory::Config, "size error: " + w) {}
};
struct SelectionError : Error {
    explicit SelectionError(const std::string& w) : Error(ErrorCategory::Config, "selection error: " + w) {}
};

// Training-side errors.
struct FitError : Error {
    explicit FitError(const std::string& w) : Error(ErrorCategory::Runtime, "fit error: " + w) {}
};
struct TrainingError : Error {
    explicit TrainingError(const std::string& w) : Error(ErrorCategory::Runtime, "training error: " + w) {}
};
struct ConvergenceError : Error {
    ConvergenceError(const std::string& w, double kkt_residual)
        : Error(ErrorCategory::Runtime,
                "convergence error: " + w + " (KKT residual " + std::to_string(kkt_residual) + ")"),
          kkt_residual(kkt_residual) {}
    double kkt_residual;
};

}  // namespace deepfuse
