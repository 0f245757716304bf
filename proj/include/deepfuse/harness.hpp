#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deepfuse/ensemble.hpp"
#include "deepfuse/hpo.hpp"

namespace deepfuse {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum class Variant { Simple, NormPca, Smote, NormPcaSmote };

Variant parse_variant(const std::string& s);
std::string variant_name(Variant v);

struct ExperimentConfig {
    std::filesystem::path features_dir;
    std::filesystem::path labels;  // empty: each feature file's sibling labels
    Variant variant = Variant::Simple;
    std::size_t k_top = 3;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
    std::filesystem::path output_dir = "out";
    double train_fraction = 0.8;
    GridProfile grid = GridProfile::Compact;
    std::size_t workers = 1;
    std::size_t smote_k = 5;
    bool plots = false;
};

/// Flat `key = value` lines; '#' starts a comment. Unknown keys, repeated
/// keys and malformed values raise ConfigError. Relative paths resolve
/// against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Train/test pair after the variant's transforms, with a log line per step.
struct PreparedSplit {
    LabeledDataset train;
    LabeledDataset test;
    std::vector<std::string> log;
};

/// minmax -> pca (norm variants) -> smote (smote variants); statistics come
/// from the training rows only and SMOTE touches only the training rows.
PreparedSplit apply_variant(Variant v, const LabeledDataset& train, const LabeledDataset& test, std::size_t smote_k,
                            std::uint64_t seed);

/// One tuned classifier evaluated on the held-out split.
struct TunedResult {
    ClassifierSpec best;
    double cv_mean = 0.0;
    double cv_std = 0.0;
    double test_accuracy = 0.0;
    ModelPtr model;
    std::vector<int> test_predictions;
};

struct RunReport {
    EvaluationTable evaluation;             // cross-validated, raw features
    Selection selection;
    EvaluationTable fusion;                 // fused candidates x families, test accuracy
    std::vector<Family> top_classifiers;
    EvaluationTable ensemble;               // feature sets x classifier combinations, test accuracy
    std::vector<std::string> transform_log;
    double seconds = 0.0;
    std::uint64_t seed = 0;
    std::string version = kArtifactVersion;
};

/// Staged experiment over one configuration. Each stage writes its outputs
/// under cfg.output_dir and may be run on its own; later stages run the
/// earlier ones they depend on.
class Pipeline {
public:
    explicit Pipeline(ExperimentConfig cfg);

    const ExperimentConfig& config() const noexcept { return cfg_; }

    /// Loads every feature set, checks label alignment and draws the single
    /// stratified train/test split.
    void ingest();

    const EvaluationTable& evaluate();
    const Selection& select();
    const EvaluationTable& fuse();
    const EvaluationTable& ensemble();

    /// Grid search + refit of one family on one named set (an extractor id,
    /// or ids joined with '+') under the configured variant.
    const TunedResult& tune(const std::string& set_name, Family family);

    RunReport report() const;
    void write_summary(double seconds) const;

    const std::vector<LabeledDataset>& sets() const noexcept { return sets_; }
    const SplitIndices& split_indices() const noexcept { return split_; }

private:
    const PreparedSplit& prepared(const std::string& set_name);
    std::filesystem::path out(const std::string& relative) const;
    void log_transform(const std::string& line);

    ExperimentConfig cfg_;
    bool ingested_ = false;
    std::vector<LabeledDataset> sets_;
    std::vector<LabeledDataset> train_;
    std::vector<LabeledDataset> test_;
    SplitIndices split_;
    std::optional<EvaluationTable> evaluation_;
    std::optional<Selection> selection_;
    std::optional<EvaluationTable> fusion_;
    std::optional<EvaluationTable> ensemble_;
    std::vector<Family> top_classifiers_;
    std::map<std::string, PreparedSplit> prepared_;
    std::map<std::pair<std::string, Family>, TunedResult> tuned_;
    std::vector<std::string> transform_log_;
    std::vector<std::string> hyperparam_rows_;
};

RunReport run_pipeline(const ExperimentConfig& cfg);

/// Loads an evaluation CSV and selects the top k, as the CLI prints it.
Selection replay_selection(const std::filesystem::path& table_csv, std::size_t k);

}  // namespace deepfuse
