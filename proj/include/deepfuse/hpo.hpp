#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "deepfuse/classifiers/model.hpp"

namespace deepfuse {

struct GridAxis {
    std::string name;
    std::vector<HyperValue> values;
};

struct GridSpec {
    Family family = Family::GaussianNB;
    std::vector<GridAxis> axes;  // expansion order: last axis varies fastest

    std::size_t size() const;
};

inline constexpr std::size_t kDefaultGridCap = 100'000;

/// Cartesian product in lexicographic order of the axes as listed. Every
/// value is validated against the family's space. SizeError past `cap`.
std::vector<HyperParams> expand_grid(const GridSpec& g, std::size_t cap = kDefaultGridCap);

/// Stratified fold partition: each class is shuffled, then its members are
/// dealt round-robin to the folds, the dealing position carrying over from
/// one class to the next. Returns each fold's row indices, sorted.
/// FoldError when a class has fewer members than folds.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int class_count,
                                                       std::size_t folds, std::uint64_t seed);

using Trainer = std::function<ModelPtr(const LabeledDataset&, const ClassifierSpec&)>;

struct TrialResult {
    HyperParams params;
    std::vector<double> fold_accuracies;
    double mean = 0.0;
    double std = 0.0;              // population
    std::vector<int> predictions;  // out-of-fold prediction for every row
    bool failed = false;           // training did not converge for some fold
    std::string failure;
};

/// One fit per fold, scored on the held-out fold. Fold model seeds derive
/// from spec.seed and the fold index; the partition derives from `seed`.
TrialResult cross_validate(const LabeledDataset& train, const ClassifierSpec& spec, std::size_t folds,
                           std::uint64_t seed, const Trainer& trainer = {});

struct GridSearchOptions {
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::size_t cap = kDefaultGridCap;
    Trainer trainer;  // defaults to deepfuse::fit
};

struct GridSearchResult {
    ClassifierSpec best;
    std::size_t best_index = 0;
    std::vector<TrialResult> trials;        // grid order
    std::vector<std::size_t> fold_of_row;   // fold id of every training row
};

/// Trial i runs with seed derive_seed(opt.seed, i); all trials share the
/// fold partition drawn from opt.seed. Trials whose training raised a
/// FitError, TrainingError or ConvergenceError are kept and marked failed;
/// any other error is rethrown (the lowest-index one when several occur).
/// Results do not depend on the worker count.
GridSearchResult grid_search(const LabeledDataset& train, const GridSpec& g, const GridSearchOptions& opt);

/// Highest mean, then lowest std, then earliest; failed trials are skipped.
/// Throws the first recorded failure as a FitError when every trial failed.
std::size_t select_best(const std::vector<TrialResult>& trials);

/// Axis columns, fold_1..fold_F, mean, std, status.
void write_trials_csv(std::ostream& out, const GridSpec& g, const std::vector<TrialResult>& trials);

enum class GridProfile { Compact, Full };
GridProfile parse_grid_profile(const std::string& name);

/// Search space for a family. Full: every listed value per parameter (two-class
/// prior overrides are dropped when class_count != 2). Compact: a reduced
/// grid sized for desk-scale runs.
GridSpec default_grid(Family f, GridProfile profile, int class_count);

/// RFC 4180 quoting when the field holds a comma, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace deepfuse
