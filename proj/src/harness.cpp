#include "deepfuse/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "deepfuse/error.hpp"
#include "deepfuse/feature_io.hpp"
#include "deepfuse/transforms.hpp"

namespace deepfuse {

Variant parse_variant(const std::string& s) {
    if (s == "simple") return Variant::Simple;
    if (s == "norm_pca") return Variant::NormPca;
    if (s == "smote") return Variant::Smote;
    if (s == "norm_pca_smote") return Variant::NormPcaSmote;
    throw ConfigError("unknown variant '" + s + "' (expected simple, norm_pca, smote or norm_pca_smote)");
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Simple: return "simple";
        case Variant::NormPca: return "norm_pca";
        case Variant::Smote: return "smote";
        case Variant::NormPcaSmote: return "norm_pca_smote";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError(key + " must be a nonnegative integer, got '" + v + "'");
    }
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigError(key + " is out of range: '" + v + "'");
    }
}

std::string real17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) s += sep;
        s += parts[i];
    }
    return s;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << content;
}

std::string counts_text(const std::vector<std::size_t>& counts) {
    std::vector<std::string> parts;
    for (auto c : counts) parts.push_back(std::to_string(c));
    return join(parts, "/");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto resolve = [&](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(line_no) + ": repeated key '" + key + "'");
        if (key == "features_dir") {
            cfg.features_dir = resolve(value);
        } else if (key == "labels") {
            cfg.labels = value.empty() ? std::filesystem::path() : resolve(value);
        } else if (key == "variant") {
            cfg.variant = parse_variant(value);
        } else if (key == "k_top") {
            cfg.k_top = parse_count(key, value);
            if (cfg.k_top != 2 && cfg.k_top != 3) throw ConfigError("k_top must be 2 or 3");
        } else if (key == "folds") {
            cfg.folds = parse_count(key, value);
            if (cfg.folds < 2) throw ConfigError("folds must be at least 2");
        } else if (key == "seed") {
            cfg.seed = parse_count(key, value);
        } else if (key == "families") {
            cfg.families.clear();
            for (const auto& name : split_on(value, ',')) {
                const Family f = parse_family(name);
                if (std::find(cfg.families.begin(), cfg.families.end(), f) != cfg.families.end()) {
                    throw ConfigError("family '" + name + "' listed twice");
                }
                cfg.families.push_back(f);
            }
            if (cfg.families.empty()) throw ConfigError("families must not be empty");
        } else if (key == "output_dir") {
            cfg.output_dir = resolve(value);
        } else if (key == "train_fraction") {
            try {
                std::size_t used = 0;
                cfg.train_fraction = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                throw ConfigError("train_fraction is not a number: '" + value + "'");
            }
            if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
                throw ConfigError("train_fraction must lie strictly between 0 and 1");
            }
        } else if (key == "grid") {
            cfg.grid = parse_grid_profile(value);
        } else if (key == "workers") {
            cfg.workers = parse_count(key, value);
            if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
        } else if (key == "smote_k") {
            cfg.smote_k = parse_count(key, value);
            if (cfg.smote_k < 1) throw ConfigError("smote_k must be at least 1");
        } else if (key == "plots") {
            if (value != "true" && value != "false") throw ConfigError("plots must be true or false");
            cfg.plots = value == "true";
        } else {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (cfg.features_dir.empty()) throw ConfigError("features_dir is required");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

PreparedSplit apply_variant(Variant v, const LabeledDataset& train, const LabeledDataset& test, std::size_t smote_k,
                            std::uint64_t seed) {
    PreparedSplit ps{train, test, {}};
    const bool norm = v == Variant::NormPca || v == Variant::NormPcaSmote;
    const bool smote = v == Variant::Smote || v == Variant::NormPcaSmote;
    if (norm) {
        const MinMaxStats stats = minmax_fit(ps.train.features());
        ps.log.push_back("minmax: fit on train " + std::to_string(ps.train.rows()) + "x" +
                         std::to_string(ps.train.cols()) + ", applied to train and test");
        ps.train = ps.train.with_features(minmax_apply(ps.train.features(), stats));
        ps.test = ps.test.with_features(minmax_apply(ps.test.features(), stats));

        const PCAModel pca = pca_fit(ps.train.features());
        ps.log.push_back("pca: fit on train " + std::to_string(ps.train.rows()) + "x" + std::to_string(ps.train.cols()) +
                         ", kept " + std::to_string(pca.output_dim()) + " components, applied to train and test");
        ps.train = ps.train.with_features(pca_apply(ps.train.features(), pca));
        ps.test = ps.test.with_features(pca_apply(ps.test.features(), pca));
    }
    if (smote) {
        const auto before = ps.train.class_counts();
        ps.train = smote_oversample(ps.train, SmoteConfig{smote_k, seed});
        ps.log.push_back("smote: train only, class counts " + counts_text(before) + " -> " +
                         counts_text(ps.train.class_counts()) + " (k=" + std::to_string(smote_k) + ")");
    }
    if (ps.log.empty()) ps.log.push_back("none: raw features");
    return ps;
}

Pipeline::Pipeline(ExperimentConfig cfg) : cfg_(std::move(cfg)) {}

std::filesystem::path Pipeline::out(const std::string& relative) const { return cfg_.output_dir / relative; }

void Pipeline::log_transform(const std::string& line) {
    transform_log_.push_back(line);
    write_file(out("transform_log.txt"), join(transform_log_, "\n") + "\n");
}

void Pipeline::ingest() {
    if (ingested_) return;
    if (!std::filesystem::is_directory(cfg_.features_dir)) {
        throw ConfigError("features_dir " + cfg_.features_dir.string() + " does not exist");
    }
    if (!cfg_.labels.empty() && !std::filesystem::exists(cfg_.labels)) {
        throw ConfigError("labels file " + cfg_.labels.string() + " does not exist");
    }
    const auto paths = list_feature_sets(cfg_.features_dir);
    if (paths.empty()) throw ConfigError("no .fset files in " + cfg_.features_dir.string());
    std::set<std::string> ids;
    for (const auto& p : paths) {
        LabeledDataset ds = cfg_.labels.empty() ? load_feature_set(p) : load_feature_set(p, cfg_.labels);
        if (!ids.insert(ds.source_tag()).second) throw ConfigError("extractor id '" + ds.source_tag() + "' appears twice");
        if (!sets_.empty() && (ds.labels() != sets_.front().labels() || ds.class_count() != sets_.front().class_count())) {
            throw AlignmentError("labels of '" + ds.source_tag() + "' differ from '" + sets_.front().source_tag() + "'");
        }
        sets_.push_back(std::move(ds));
    }
    const auto& first = sets_.front();
    split_ = deepfuse::split_indices(first.labels(), first.class_count(),
                                     SplitSpec{cfg_.train_fraction, cfg_.seed, true});
    for (const auto& s : sets_) {
        train_.push_back(s.take_rows(split_.train));
        test_.push_back(s.take_rows(split_.test));
    }
    std::filesystem::create_directories(cfg_.output_dir);
    ingested_ = true;
}

const EvaluationTable& Pipeline::evaluate() {
    if (evaluation_) return *evaluation_;
    ingest();
    EvaluateOptions opt;
    opt.families = cfg_.families;
    opt.profile = cfg_.grid;
    opt.folds = cfg_.folds;
    opt.seed = cfg_.seed;
    opt.workers = cfg_.workers;
    EvaluationRun run = evaluate_feature_sets(train_, opt);

    for (std::size_t s = 0; s < sets_.size(); ++s) {
        for (std::size_t f = 0; f < cfg_.families.size(); ++f) {
            const Family fam = cfg_.families[f];
            const GridSearchResult& r = run.searches[s][f];
            const TrialResult& best = r.trials[r.best_index];
            const std::string stem = sets_[s].source_tag() + "_" + std::string(family_name(fam));
            std::ostringstream trials;
            write_trials_csv(trials, default_grid(fam, cfg_.grid, sets_[s].class_count()), r.trials);
            write_file(out("trials/evaluation_" + stem + ".csv"), trials.str());
            std::ostringstream pred;
            pred << "row,label,pred,fold\n";
            for (std::size_t i = 0; i < train_[s].rows(); ++i) {
                pred << split_.train[i] << ',' << train_[s].labels()[i] << ',' << best.predictions[i] << ','
                     << r.fold_of_row[i] << '\n';
            }
            write_file(out("predictions/evaluation_" + stem + ".csv"), pred.str());
            hyperparam_rows_.push_back("evaluation," + csv_field(sets_[s].source_tag()) + "," +
                                       std::string(family_name(fam)) + "," + csv_field(format_params(r.best.hyperparams)) +
                                       "," + real17(best.mean) + "," + real17(best.std) + ",");
        }
    }
    std::ostringstream table;
    write_evaluation_csv(table, run.table);
    write_file(out("evaluation.csv"), table.str());
    write_file(out("hyperparams.csv"),
               "stage,feature_set,family,params,cv_mean,cv_std,test_accuracy\n" + join(hyperparam_rows_, "\n") + "\n");
    if (cfg_.plots) {
        std::ostringstream dat;
        dat << "# index mean std extractor\n";
        for (std::size_t r = 0; r < run.table.extractors.size(); ++r) {
            dat << r << ' ' << real17(run.table.row_mean(r)) << ' ' << real17(run.table.row_std(r)) << ' '
                << run.table.extractors[r] << '\n';
        }
        write_file(out("plots/evaluation.dat"), dat.str());
    }
    evaluation_ = std::move(run.table);
    return *evaluation_;
}

const Selection& Pipeline::select() {
    if (selection_) return *selection_;
    const EvaluationTable& t = evaluate();
    Selection sel = select_top_k(t, cfg_.k_top);
    std::ostringstream text;
    text << "rank,extractor,mean,std,family,status\n";
    for (std::size_t i = 0; i < sel.trace.size(); ++i) {
        const auto& s = sel.trace[i];
        text << (i + 1) << ',' << csv_field(s.extractor) << ',' << real17(s.mean) << ',' << real17(s.std) << ','
             << csv_field(s.family) << ',' << (s.selected ? "selected" : "skipped (family of " + s.skipped_for + ")")
             << '\n';
    }
    text << "selected: " << join(sel.ids, ", ") << '\n';
    write_file(out("selection.txt"), text.str());
    selection_ = std::move(sel);
    return *selection_;
}

const PreparedSplit& Pipeline::prepared(const std::string& set_name) {
    auto it = prepared_.find(set_name);
    if (it != prepared_.end()) return it->second;
    ingest();
    std::vector<LabeledDataset> tr;
    std::vector<LabeledDataset> te;
    for (const auto& id : split_on(set_name, '+')) {
        auto pos = std::find_if(sets_.begin(), sets_.end(), [&](const LabeledDataset& d) { return d.source_tag() == id; });
        if (pos == sets_.end()) throw ConfigError("no feature set named '" + id + "'");
        const auto idx = static_cast<std::size_t>(pos - sets_.begin());
        tr.push_back(train_[idx]);
        te.push_back(test_[idx]);
    }
    LabeledDataset fused_train = deepfuse::fuse(tr);
    LabeledDataset fused_test = concat_columns(te);
    PreparedSplit ps = apply_variant(cfg_.variant, fused_train, fused_test, cfg_.smote_k, cfg_.seed);
    for (const auto& line : ps.log) log_transform(set_name + ": " + line);
    return prepared_.emplace(set_name, std::move(ps)).first->second;
}

const TunedResult& Pipeline::tune(const std::string& set_name, Family family) {
    const auto key = std::make_pair(set_name, family);
    auto it = tuned_.find(key);
    if (it != tuned_.end()) return it->second;
    const PreparedSplit& ps = prepared(set_name);
    const GridSpec grid = default_grid(family, cfg_.grid, ps.train.class_count());
    GridSearchOptions opt{cfg_.folds, cfg_.seed, cfg_.workers, kDefaultGridCap, {}};
    GridSearchResult r = grid_search(ps.train, grid, opt);
    TunedResult t;
    t.best = r.best;
    t.cv_mean = r.trials[r.best_index].mean;
    t.cv_std = r.trials[r.best_index].std;
    t.model = fit(ps.train, r.best);
    t.test_predictions = t.model->predict(ps.test.features());
    t.test_accuracy = accuracy(ps.test.labels(), t.test_predictions);

    const std::string stem = set_name + "_" + std::string(family_name(family));
    std::ostringstream trials;
    write_trials_csv(trials, grid, r.trials);
    write_file(out("trials/tuned_" + stem + ".csv"), trials.str());
    std::ostringstream pred;
    pred << "row,label,pred\n";
    for (std::size_t i = 0; i < ps.test.rows(); ++i) {
        pred << split_.test[i] << ',' << ps.test.labels()[i] << ',' << t.test_predictions[i] << '\n';
    }
    write_file(out("predictions/test_" + stem + ".csv"), pred.str());
    hyperparam_rows_.push_back("tuned," + csv_field(set_name) + "," + std::string(family_name(family)) + "," +
                               csv_field(format_params(t.best.hyperparams)) + "," + real17(t.cv_mean) + "," +
                               real17(t.cv_std) + "," + real17(t.test_accuracy));
    write_file(out("hyperparams.csv"),
               "stage,feature_set,family,params,cv_mean,cv_std,test_accuracy\n" + join(hyperparam_rows_, "\n") + "\n");
    return tuned_.emplace(key, std::move(t)).first->second;
}

const EvaluationTable& Pipeline::fuse() {
    if (fusion_) return *fusion_;
    ingest();
    if (sets_.size() < 2) throw ConfigError("fusion needs at least two feature sets");
    const Selection& sel = select();
    EvaluationTable t;
    for (Family f : cfg_.families) t.columns.emplace_back(table_name(f));
    for (const auto& idx : fusion_candidates(sel.ids.size())) {
        std::vector<std::string> parts;
        for (std::size_t i : idx) parts.push_back(sel.ids[i]);
        const std::string name = join(parts, "+");
        std::vector<double> row;
        for (Family f : cfg_.families) row.push_back(tune(name, f).test_accuracy);
        t.extractors.push_back(name);
        t.cells.push_back(std::move(row));
    }
    std::ostringstream table;
    write_evaluation_csv(table, t);
    write_file(out("fusion.csv"), table.str());
    if (cfg_.plots) {
        std::ostringstream dat;
        dat << "# index mean feature_set\n";
        for (std::size_t r = 0; r < t.extractors.size(); ++r) {
            dat << r << ' ' << real17(t.row_mean(r)) << ' ' << t.extractors[r] << '\n';
        }
        write_file(out("plots/fusion.dat"), dat.str());
    }
    fusion_ = std::move(t);
    return *fusion_;
}

const EvaluationTable& Pipeline::ensemble() {
    if (ensemble_) return *ensemble_;
    if (cfg_.families.size() < 2) throw ConfigError("classifier ensembles need at least two families");
    const EvaluationTable& eval = evaluate();
    const Selection& sel = select();
    top_classifiers_ = top_families(eval, 3);
    const auto combos = classifier_combinations(top_classifiers_);

    std::vector<std::string> names;
    const auto ranked = rank_rows(eval);
    for (std::size_t i = 0; i < std::min<std::size_t>(5, ranked.size()); ++i) names.push_back(eval.extractors[ranked[i]]);
    if (sel.ids.size() >= 2) names.push_back(join(sel.ids, "+"));

    EvaluationTable t;
    for (const auto& combo : combos) {
        std::vector<std::string> parts;
        for (Family f : combo) parts.emplace_back(table_name(f));
        t.columns.push_back(join(parts, "+"));
    }
    for (const auto& name : names) {
        const PreparedSplit& ps = prepared(name);
        std::vector<double> row;
        for (std::size_t c = 0; c < combos.size(); ++c) {
            std::vector<ModelPtr> members;
            for (Family f : combos[c]) members.push_back(tune(name, f).model);
            const std::vector<int> pred = vote_predict(members, ps.test.features());
            row.push_back(accuracy(ps.test.labels(), pred));
            std::ostringstream p;
            p << "row,label,pred\n";
            for (std::size_t i = 0; i < pred.size(); ++i) {
                p << split_.test[i] << ',' << ps.test.labels()[i] << ',' << pred[i] << '\n';
            }
            write_file(out("predictions/vote_" + name + "_" + t.columns[c] + ".csv"), p.str());
        }
        t.extractors.push_back(name);
        t.cells.push_back(std::move(row));
    }
    std::ostringstream table;
    write_evaluation_csv(table, t);
    write_file(out("ensemble.csv"), table.str());
    ensemble_ = std::move(t);
    return *ensemble_;
}

RunReport Pipeline::report() const {
    RunReport r;
    if (evaluation_) r.evaluation = *evaluation_;
    if (selection_) r.selection = *selection_;
    if (fusion_) r.fusion = *fusion_;
    if (ensemble_) r.ensemble = *ensemble_;
    r.top_classifiers = top_classifiers_;
    r.transform_log = transform_log_;
    r.seed = cfg_.seed;
    return r;
}

namespace {

// Best cell of a table as "row / column: value".
std::string best_cell(const EvaluationTable& t) {
    std::size_t br = 0;
    std::size_t bc = 0;
    for (std::size_t r = 0; r < t.cells.size(); ++r) {
        for (std::size_t c = 0; c < t.cells[r].size(); ++c) {
            if (t.cells[r][c] > t.cells[br][bc]) {
                br = r;
                bc = c;
            }
        }
    }
    return t.extractors[br] + " / " + t.columns[bc] + ": " + real17(t.cells[br][bc]);
}

}  // namespace

void Pipeline::write_summary(double seconds) const {
    std::ostringstream s;
    s << "version: " << kArtifactVersion << '\n';
    s << "seed: " << cfg_.seed << '\n';
    s << "variant: " << variant_name(cfg_.variant) << '\n';
    s << "feature sets: " << sets_.size() << '\n';
    s << "train rows: " << split_.train.size() << ", test rows: " << split_.test.size() << '\n';
    if (selection_) s << "selected: " << join(selection_->ids, ", ") << '\n';
    if (fusion_ && !fusion_->extractors.empty()) s << "best fusion: " << best_cell(*fusion_) << '\n';
    if (!top_classifiers_.empty()) {
        std::vector<std::string> names;
        for (Family f : top_classifiers_) names.emplace_back(table_name(f));
        s << "top classifiers: " << join(names, ", ") << '\n';
    }
    if (ensemble_ && !ensemble_->extractors.empty()) s << "best ensemble: " << best_cell(*ensemble_) << '\n';
    s << "wall-clock seconds: " << real17(seconds) << '\n';
    write_file(out("summary.txt"), s.str());
}

RunReport run_pipeline(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    Pipeline p(cfg);
    p.ingest();
    p.evaluate();
    p.select();
    if (p.sets().size() >= 2) p.fuse();
    if (cfg.families.size() >= 2) p.ensemble();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    p.write_summary(seconds);
    RunReport r = p.report();
    r.seconds = seconds;
    return r;
}

Selection replay_selection(const std::filesystem::path& table_csv, std::size_t k) {
    return select_top_k(read_evaluation_csv(table_csv), k);
}

}  // namespace deepfuse
