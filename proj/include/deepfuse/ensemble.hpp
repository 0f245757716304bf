#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "deepfuse/classifiers/model.hpp"
#include "deepfuse/hpo.hpp"

namespace deepfuse {

/// Extractor rows x classifier columns of accuracies.
struct EvaluationTable {
    std::vector<std::string> extractors;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> cells;

    double row_mean(std::size_t r) const;
    double row_std(std::size_t r) const;  // population
    double column_mean(std::size_t c) const;
};

/// Header `extractor,<column>...[,Average]`. A trailing Average column and
/// an Average row are accepted and ignored; statistics are always recomputed
/// from the cells. ParseError (with line number) on malformed input.
EvaluationTable read_evaluation_csv(std::istream& in);
EvaluationTable read_evaluation_csv(const std::filesystem::path& path);

/// Writes the cells plus an Average column (row means), %.17g.
void write_evaluation_csv(std::ostream& out, const EvaluationTable& t);

using FamilyRule = std::function<std::string(const std::string&)>;

/// Architecture key used to keep selections diverse. Ids containing
/// "_patch" lose a trailing `_<digits>` resolution suffix
/// (vit_base_patch16_224 -> vit_base_patch16); other ids keep the leading
/// alphabetic run of their first token (resnet50 -> resnet, mnasnet0_5 -> mnasnet).
std::string family_key(const std::string& extractor_id);

/// Row order by mean descending, std ascending, then table order.
std::vector<std::size_t> rank_rows(const EvaluationTable& t);

struct RankStep {
    std::string extractor;
    double mean = 0.0;
    double std = 0.0;
    std::string family;
    bool selected = false;
    std::string skipped_for;  // selected id sharing the family key, when skipped
};

struct Selection {
    std::vector<std::string> ids;  // in selection order
    std::vector<RankStep> trace;   // every ranked row visited
};

/// Walks the ranking, skipping rows whose family key is already selected.
/// SelectionError when fewer than k distinct families exist.
Selection select_top_k(const EvaluationTable& t, std::size_t k, const FamilyRule& rule = family_key);

/// Index subsets of a selection to fuse: every pair in lexicographic order,
/// then the full set when it has three or more members.
std::vector<std::vector<std::size_t>> fusion_candidates(std::size_t selected);

/// Concatenates feature sets; SelectionError if two share a family key.
LabeledDataset fuse(std::span<const LabeledDataset> sets, const FamilyRule& rule = family_key);

/// Hard majority vote. Ties go to the tied label with the highest mean
/// member probability, then to the earliest member predicting a tied label.
/// `probas[m]` is member m's n x K probability matrix, row-major.
std::vector<int> vote_labels(const std::vector<std::vector<int>>& predictions,
                             const std::vector<std::vector<double>>& probas, int class_count);

/// Requires 2 or 3 members fit on the same feature space.
std::vector<int> vote_predict(const std::vector<ModelPtr>& members, const FeatureMatrix& x);

/// Family pairs (lexicographic by rank) followed by the full trio.
std::vector<std::vector<Family>> classifier_combinations(const std::vector<Family>& ranked);

/// The n families whose table columns have the highest means (ties: column order).
std::vector<Family> top_families(const EvaluationTable& t, std::size_t n);

struct EvaluateOptions {
    std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
    GridProfile profile = GridProfile::Compact;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    Trainer trainer;
};

struct EvaluationRun {
    EvaluationTable table;
    std::vector<std::vector<GridSearchResult>> searches;  // [set][family]
};

/// Cell (i, j) = best cross-validated accuracy of family j's grid on set i.
/// Every cell searches with the same master seed.
EvaluationRun evaluate_feature_sets(std::span<const LabeledDataset> sets, const EvaluateOptions& opt);

}  // namespace deepfuse
