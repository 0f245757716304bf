#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "deepfuse/dataset.hpp"

namespace deepfuse {

/// Parsed first line of an FSET1 file: `FSET1 <extractor_id> <rows> <cols> f32le\n`.
struct FeatureSetHeader {
    std::string extractor_id;
    std::size_t rows = 0;
    std::size_t cols = 0;

    static constexpr const char* kMagic = "FSET1";
    static constexpr const char* kDtype = "f32le";

    std::string to_line() const;  // includes the trailing newline
};

/// `<dir>/<stem>.labels` for a feature file `<dir>/<stem>.<ext>`.
std::filesystem::path labels_path_for(const std::filesystem::path& feature_path);

/// One integer per line; blank lines are ignored.
std::vector<std::int64_t> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

/// Loads an FSET1 payload and its sibling labels file. Raw label values are
/// re-encoded densely by sorted value. Values are widened to double.
LabeledDataset load_feature_set(const std::filesystem::path& path);

/// As above, with labels taken from an explicit file instead of the sibling.
LabeledDataset load_feature_set(const std::filesystem::path& path, const std::filesystem::path& labels);

/// Writes the FSET1 file (values narrowed to float32) and its sibling labels file.
void save_feature_set(const std::filesystem::path& path, const LabeledDataset& ds);

/// Every `*.fset` file in a directory, sorted by file name.
std::vector<std::filesystem::path> list_feature_sets(const std::filesystem::path& dir);

}  // namespace deepfuse
