#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "deepfuse/dataset.hpp"

namespace deepfuse {

/// A stand-in feature extractor whose two classes are unit-variance
/// Gaussians, with means placed so that the Bayes-optimal accuracy is
/// `bayes_accuracy`.
struct SyntheticExtractor {
    std::string id;
    double bayes_accuracy = 0.9;
    std::size_t dims = 8;
};

/// Half the distance between the class means that gives this Bayes accuracy
/// for two equiprobable unit-variance Gaussians: Phi^{-1}(accuracy).
double separation_for_accuracy(double accuracy);

/// The default trio: alphanet 0.98, betanet 0.90, gammanet 0.60.
std::vector<SyntheticExtractor> default_synthetic_extractors();

/// One dataset per extractor over the same `rows` samples and labels (two
/// balanced classes in shuffled order). Noise is independent per extractor.
std::vector<LabeledDataset> make_synthetic_sets(const std::vector<SyntheticExtractor>& extractors, std::size_t rows,
                                                std::uint64_t seed);

/// Writes `<id>.fset` and `<id>.labels` for each set into `dir`.
void write_synthetic_fixture(const std::filesystem::path& dir, const std::vector<LabeledDataset>& sets);

}  // namespace deepfuse
