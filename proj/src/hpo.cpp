#include "deepfuse/hpo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <thread>

#include "deepfuse/error.hpp"
#include "deepfuse/random.hpp"

namespace deepfuse {

std::size_t GridSpec::size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

std::vector<HyperParams> expand_grid(const GridSpec& g, std::size_t cap) {
    if (g.axes.empty()) throw ConfigError("grid has no axes");
    std::size_t total = 1;
    for (const auto& a : g.axes) {
        if (a.values.empty()) throw ConfigError("grid axis '" + a.name + "' is empty");
        if (total > cap / a.values.size() + 1) throw SizeError("grid exceeds " + std::to_string(cap) + " assignments");
        total *= a.values.size();
        for (const auto& v : a.values) validate_params(g.family, HyperParams{{a.name, v}});
    }
    if (total > cap) {
        throw SizeError("grid has " + std::to_string(total) + " assignments, cap is " + std::to_string(cap));
    }
    std::vector<HyperParams> out;
    out.reserve(total);
    std::vector<std::size_t> idx(g.axes.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
        HyperParams p;
        for (std::size_t a = 0; a < g.axes.size(); ++a) p[g.axes[a].name] = g.axes[a].values[idx[a]];
        out.push_back(std::move(p));
        for (std::size_t a = g.axes.size(); a-- > 0;) {
            if (++idx[a] < g.axes[a].values.size()) break;
            idx[a] = 0;
        }
    }
    return out;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int class_count,
                                                       std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(class_count));
    for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
    for (std::size_t c = 0; c < members.size(); ++c) {
        if (members[c].size() < folds) throw FoldError(static_cast<int>(c), members[c].size(), folds);
    }
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> out(folds);
    std::size_t pos = 0;
    for (auto& m : members) {
        rng.shuffle(m);
        for (std::size_t i : m) out[pos++ % folds].push_back(i);
    }
    for (auto& f : out) std::sort(f.begin(), f.end());
    return out;
}

namespace {

void summarize(TrialResult& t) {
    const double n = static_cast<double>(t.fold_accuracies.size());
    double mean = 0.0;
    for (double a : t.fold_accuracies) mean += a;
    mean /= n;
    double var = 0.0;
    for (double a : t.fold_accuracies) var += (a - mean) * (a - mean);
    t.mean = mean;
    t.std = std::sqrt(var / n);
}

TrialResult run_folds(const LabeledDataset& train, const ClassifierSpec& spec,
                      const std::vector<std::vector<std::size_t>>& folds, const Trainer& trainer) {
    TrialResult t;
    t.params = spec.hyperparams;
    t.predictions.assign(train.rows(), -1);
    std::vector<std::size_t> fold_of(train.rows());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        for (std::size_t i : folds[f]) fold_of[i] = f;
    }
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> fit_rows;
        fit_rows.reserve(train.rows() - folds[f].size());
        for (std::size_t i = 0; i < train.rows(); ++i) {
            if (fold_of[i] != f) fit_rows.push_back(i);
        }
        ClassifierSpec fold_spec = spec;
        fold_spec.seed = derive_seed(spec.seed, f);
        const ModelPtr model = trainer ? trainer(train.take_rows(fit_rows), fold_spec)
                                       : fit(train.take_rows(fit_rows), fold_spec);
        const std::vector<int> pred = model->predict(train.features().take_rows(folds[f]));
        std::size_t hit = 0;
        for (std::size_t j = 0; j < folds[f].size(); ++j) {
            t.predictions[folds[f][j]] = pred[j];
            hit += pred[j] == train.labels()[folds[f][j]];
        }
        t.fold_accuracies.push_back(static_cast<double>(hit) / static_cast<double>(folds[f].size()));
    }
    summarize(t);
    return t;
}

}  // namespace

TrialResult cross_validate(const LabeledDataset& train, const ClassifierSpec& spec, std::size_t folds,
                           std::uint64_t seed, const Trainer& trainer) {
    return run_folds(train, spec, stratified_folds(train.labels(), train.class_count(), folds, seed), trainer);
}

std::size_t select_best(const std::vector<TrialResult>& trials) {
    std::size_t best = trials.size();
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (trials[i].failed) continue;
        if (best == trials.size() || trials[i].mean > trials[best].mean ||
            (trials[i].mean == trials[best].mean && trials[i].std < trials[best].std)) {
            best = i;
        }
    }
    if (best == trials.size()) {
        throw FitError(trials.empty() ? std::string("no trials to choose from")
                                      : "every trial failed; first: " + trials.front().failure);
    }
    return best;
}

GridSearchResult grid_search(const LabeledDataset& train, const GridSpec& g, const GridSearchOptions& opt) {
    const std::vector<HyperParams> grid = expand_grid(g, opt.cap);
    const auto folds = stratified_folds(train.labels(), train.class_count(), opt.folds, opt.seed);

    std::vector<TrialResult> trials(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            ClassifierSpec spec{g.family, grid[i], derive_seed(opt.seed, i)};
            try {
                trials[i] = run_folds(train, spec, folds, opt.trainer);
            } catch (const ConvergenceError& e) {
                trials[i] = TrialResult{grid[i], {}, 0.0, 0.0, {}, true, e.what()};
            } catch (const TrainingError& e) {
                trials[i] = TrialResult{grid[i], {}, 0.0, 0.0, {}, true, e.what()};
            } catch (const FitError& e) {
                trials[i] = TrialResult{grid[i], {}, 0.0, 0.0, {}, true, e.what()};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(opt.workers, 1, grid.size());
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    GridSearchResult r;
    r.best_index = select_best(trials);
    r.best = ClassifierSpec{g.family, grid[r.best_index], derive_seed(opt.seed, r.best_index)};
    r.trials = std::move(trials);
    r.fold_of_row.assign(train.rows(), 0);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        for (std::size_t i : folds[f]) r.fold_of_row[i] = f;
    }
    return r;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

namespace {

std::string real17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_trials_csv(std::ostream& out, const GridSpec& g, const std::vector<TrialResult>& trials) {
    std::size_t folds = 0;
    for (const auto& t : trials) folds = std::max(folds, t.fold_accuracies.size());
    for (const auto& a : g.axes) out << csv_field(a.name) << ',';
    for (std::size_t f = 0; f < folds; ++f) out << "fold_" << (f + 1) << ',';
    out << "mean,std,status\n";
    for (const auto& t : trials) {
        for (const auto& a : g.axes) {
            auto it = t.params.find(a.name);
            out << csv_field(it == t.params.end() ? std::string() : format_value(it->second)) << ',';
        }
        for (std::size_t f = 0; f < folds; ++f) {
            out << (f < t.fold_accuracies.size() ? real17(t.fold_accuracies[f]) : std::string()) << ',';
        }
        out << real17(t.mean) << ',' << real17(t.std) << ',' << (t.failed ? csv_field("failed: " + t.failure) : "ok")
            << '\n';
    }
}

GridProfile parse_grid_profile(const std::string& name) {
    if (name == "compact") return GridProfile::Compact;
    if (name == "full") return GridProfile::Full;
    throw ConfigError("unknown grid profile '" + name + "' (expected compact or full)");
}

namespace {

using V = std::vector<HyperValue>;
using IL = std::vector<std::int64_t>;
using RL = std::vector<double>;

HyperValue s(const char* v) { return std::string(v); }
HyperValue i(std::int64_t v) { return v; }
HyperValue r(double v) { return v; }
const HyperValue kNone = NoneValue{};

V int_range(std::int64_t from, std::int64_t to, std::int64_t step) {
    V out;
    for (std::int64_t v = from; v < to; v += step) out.push_back(v);
    return out;
}

GridSpec full_grid(Family f, int class_count) {
    switch (f) {
        case Family::GBT:
            return {f, {{"max_depth", {i(3), i(5), i(7)}},
                        {"learning_rate", {r(0.1), r(0.01), r(0.001)}},
                        {"subsample", {r(0.5), r(0.7), r(1.0)}},
                        {"n_estimators", {i(100), i(200), i(300)}}}};
        case Family::MLP:
            return {f, {{"hidden_layer_sizes", {IL{50}, IL{100, 22}, IL{100, 100, 50}, IL{100, 50, 36, 30},
                                                IL{100, 100, 200, 150, 100}}},
                        {"activation", {s("relu"), s("tanh"), s("logistic")}},
                        {"solver", {s("adam"), s("sgd"), s("lbfgs")}},
                        {"max_iter", {i(1000)}},
                        {"momentum", {r(0.9), r(0.95), r(0.99)}}}};
        case Family::GaussianNB: {
            V priors{kNone};
            if (class_count == 2) {
                priors.push_back(RL{0.3, 0.7});
                priors.push_back(RL{0.4, 0.6});
                priors.push_back(RL{0.5, 0.5});
            }
            return {f, {{"var_smoothing", {r(1e-9), r(1e-8), r(1e-7), r(1e-6), r(1e-5)}}, {"priors", priors}}};
        }
        case Family::AdaBoost:
            return {f, {{"n_estimators", {i(50), i(70), i(90), i(120), i(180), i(200)}},
                        {"learning_rate", {r(0.001), r(0.01), r(0.1), r(1.0), r(10.0)}}}};
        case Family::KNN:
            return {f, {{"n_neighbors", int_range(1, 31, 1)},
                        {"weights", {s("uniform"), s("distance")}},
                        {"algorithm", {s("auto"), s("ball_tree"), s("kd_tree"), s("brute")}},
                        {"leaf_size", int_range(10, 51, 5)},
                        {"p", {i(1), i(2)}},
                        {"metric", {s("euclidean"), s("manhattan"), s("minkowski")}},
                        {"n_jobs", {i(-1)}}}};
        case Family::RandomForest:
            return {f, {{"n_estimators", {i(100), i(200), i(300), i(400), i(500)}},
                        {"max_depth", {kNone, i(10), i(20), i(30), i(40), i(50)}},
                        {"min_samples_split", {i(2), i(5), i(10)}},
                        {"min_samples_leaf", {i(1), i(2), i(4)}},
                        {"max_features", {s("auto"), s("sqrt"), s("log2")}},
                        {"bootstrap", {true, false}},
                        {"criterion", {s("gini"), s("entropy")}},
                        {"oob_score", {true, false}},
                        {"random_state", {i(42)}}}};
        case Family::SVMLinear:
            return {f, {{"C", {r(0.1), r(1.0), r(10.0), r(100.0), r(1000.0)}},
                        {"kernel", {s("linear")}},
                        {"tol", {r(1e-3), r(1e-4), r(1e-5)}},
                        {"class_weight", {kNone, s("balanced")}},
                        {"random_state", {i(42)}}}};
        case Family::SVMSigmoid:
            return {f, {{"kernel", {s("sigmoid")}},
                        {"C", {r(0.1), r(1.0), r(10.0), r(100.0)}},
                        {"gamma", {s("scale"), s("auto")}},
                        {"coef0", {r(0.0), r(0.1), r(0.5), r(1.0)}},
                        {"tol", {r(1e-3), r(1e-4), r(1e-5)}},
                        {"class_weight", {kNone, s("balanced")}},
                        {"shrinking", {true, false}},
                        {"probability", {true, false}},
                        {"cache_size", {r(200.0), r(500.0), r(100.0)}},
                        {"random_state", {i(42)}}}};
        case Family::SVMRbf:
            return {f, {{"C", {r(0.1), r(1.0), r(10.0), r(100.0)}},
                        {"gamma", {s("scale"), s("auto"), r(0.1), r(1.0), r(10.0)}},
                        {"kernel", {s("rbf")}},
                        {"class_weight", {kNone, s("balanced")}},
                        {"shrinking", {true, false}},
                        {"probability", {true, false}},
                        {"tol", {r(1e-3), r(1e-4)}},
                        {"cache_size", {r(200.0), r(500.0), r(1000.0)}},
                        {"max_iter", {i(-1), i(1000), i(5000)}}}};
    }
    return {f, {}};
}

GridSpec compact_grid(Family f) {
    switch (f) {
        case Family::GBT:
            return {f, {{"max_depth", {i(3), i(5)}},
                        {"learning_rate", {r(0.1)}},
                        {"subsample", {r(1.0), r(0.7)}},
                        {"n_estimators", {i(100)}}}};
        case Family::MLP:
            return {f, {{"hidden_layer_sizes", {IL{50}, IL{100, 22}}},
                        {"activation", {s("relu")}},
                        {"solver", {s("adam")}},
                        {"max_iter", {i(300)}}}};
        case Family::GaussianNB:
            return {f, {{"var_smoothing", {r(1e-9), r(1e-7), r(1e-5)}}}};
        case Family::AdaBoost:
            return {f, {{"n_estimators", {i(50), i(100)}}, {"learning_rate", {r(0.1), r(1.0)}}}};
        case Family::KNN:
            return {f, {{"n_neighbors", {i(1), i(3), i(5), i(7), i(9), i(11), i(15)}},
                        {"weights", {s("uniform"), s("distance")}},
                        {"metric", {s("euclidean"), s("manhattan")}}}};
        case Family::RandomForest:
            return {f, {{"n_estimators", {i(100)}},
                        {"max_depth", {kNone, i(10)}},
                        {"max_features", {s("sqrt")}},
                        {"bootstrap", {true}}}};
        case Family::SVMLinear:
            return {f, {{"C", {r(0.1), r(1.0), r(10.0)}}}};
        case Family::SVMSigmoid:
            return {f, {{"C", {r(0.1), r(1.0), r(10.0)}}, {"gamma", {s("scale"), s("auto")}}, {"coef0", {r(0.0)}}}};
        case Family::SVMRbf:
            return {f, {{"C", {r(0.1), r(1.0), r(10.0), r(100.0)}}, {"gamma", {s("scale"), s("auto"), r(0.1)}}}};
    }
    return {f, {}};
}

}  // namespace

GridSpec default_grid(Family f, GridProfile profile, int class_count) {
    return profile == GridProfile::Full ? full_grid(f, class_count) : compact_grid(f);
}

}  // namespace deepfuse
