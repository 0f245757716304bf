#include "deepfuse/classifiers/forest.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepfuse/error.hpp"

namespace deepfuse {

std::size_t resolve_max_features(const HyperValue& v, std::size_t d) {
    std::size_t m = d;
    switch (kind_of(v)) {
        case ValueKind::None: break;
        case ValueKind::String: {
            const auto& s = std::get<std::string>(v);
            const double dd = static_cast<double>(d);
            m = static_cast<std::size_t>(s == "log2" ? std::floor(std::log2(dd)) : std::floor(std::sqrt(dd)));
            break;
        }
        case ValueKind::Int: {
            const auto i = std::get<std::int64_t>(v);
            if (i < 1) throw ConfigError("max_features must be at least 1");
            m = std::min<std::size_t>(static_cast<std::size_t>(i), d);
            break;
        }
        case ValueKind::Real: {
            const double f = std::get<double>(v);
            if (!(f > 0.0 && f <= 1.0)) throw ConfigError("fractional max_features must lie in (0, 1]");
            m = static_cast<std::size_t>(std::floor(f * static_cast<double>(d)));
            break;
        }
        default: throw ConfigError("unsupported max_features value " + format_value(v));
    }
    return std::clamp<std::size_t>(m, 1, d);
}

ForestModel::ForestModel(ClassifierSpec spec, int class_count, std::size_t feature_count,
                         std::vector<DecisionTree> trees, std::optional<double> oob_score)
    : FittedModel(std::move(spec), class_count, feature_count), trees_(std::move(trees)), oob_score_(oob_score) {}

std::vector<double> ForestModel::proba_rows(const FeatureMatrix& x) const {
    const auto k = static_cast<std::size_t>(class_count());
    std::vector<double> out(x.rows() * k, 0.0);
    const double share = 1.0 / static_cast<double>(trees_.size());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (const auto& t : trees_) out[r * k + static_cast<std::size_t>(t.predict(x.row(r)))] += share;
    }
    return out;
}

void ForestModel::write_body(BinaryWriter& w) const {
    w.u64(oob_score_.has_value() ? 1 : 0);
    w.f64(oob_score_.value_or(0.0));
    w.u64(trees_.size());
    for (const auto& t : trees_) t.write(w);
}

ModelPtr read_forest(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d) {
    const bool has_oob = r.u64() != 0;
    const double oob = r.f64();
    const std::uint64_t n = r.u64();
    if (n == 0 || n > 1'000'000) throw FormatError("forest blob tree count out of range");
    std::vector<DecisionTree> trees;
    for (std::uint64_t i = 0; i < n; ++i) trees.push_back(DecisionTree::read(r, k, d));
    return std::make_shared<ForestModel>(std::move(spec), k, d, std::move(trees),
                                         has_oob ? std::optional<double>(oob) : std::nullopt);
}

ModelPtr fit_forest(const LabeledDataset& train, const ClassifierSpec& spec) {
    ParamReader p(spec.family, spec.hyperparams);
    const auto n_estimators = p.get_int("n_estimators");
    if (n_estimators < 1) throw ConfigError("RandomForest n_estimators must be at least 1");
    CartParams cart;
    if (!p.is_none("max_depth")) {
        const auto depth = p.get_int("max_depth");
        if (depth < 0) throw ConfigError("RandomForest max_depth must be nonnegative");
        cart.max_depth = static_cast<int>(depth);
    }
    const auto mss = p.get_int("min_samples_split");
    const auto msl = p.get_int("min_samples_leaf");
    if (mss < 2 || msl < 1) throw ConfigError("RandomForest min_samples_split >= 2 and min_samples_leaf >= 1 required");
    cart.min_samples_split = static_cast<std::size_t>(mss);
    cart.min_samples_leaf = static_cast<std::size_t>(msl);
    cart.criterion = p.get_string("criterion") == "entropy" ? SplitCriterion::Entropy : SplitCriterion::Gini;
    const std::size_t d = train.cols();
    cart.max_features = resolve_max_features(p.get("max_features"), d);
    const bool bootstrap = p.get_bool("bootstrap");
    const bool want_oob = p.get_bool("oob_score");
    if (want_oob && !bootstrap) throw ConfigError("RandomForest oob_score requires bootstrap=True");
    const std::uint64_t seed =
        p.is_none("random_state") ? spec.seed : static_cast<std::uint64_t>(p.get_int("random_state"));

    const std::size_t n = train.rows();
    const auto k = static_cast<std::size_t>(train.class_count());
    std::vector<DecisionTree> trees;
    trees.reserve(static_cast<std::size_t>(n_estimators));
    std::vector<double> oob_votes(want_oob ? n * k : 0, 0.0);
    for (std::int64_t t = 0; t < n_estimators; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<double> weights(n, 1.0);
        if (bootstrap) {
            std::fill(weights.begin(), weights.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) weights[rng.below(n)] += 1.0;
        }
        trees.push_back(DecisionTree::fit(train.features(), train.labels(), train.class_count(), weights, cart, &rng));
        if (want_oob) {
            for (std::size_t i = 0; i < n; ++i) {
                if (weights[i] == 0.0) {
                    oob_votes[i * k + static_cast<std::size_t>(trees.back().predict(train.features().row(i)))] += 1.0;
                }
            }
        }
    }
    std::optional<double> oob;
    if (want_oob) {
        std::size_t scored = 0;
        std::size_t hit = 0;
        for (std::size_t i = 0; i < n; ++i) {
            auto first = oob_votes.begin() + static_cast<std::ptrdiff_t>(i * k);
            auto last = first + static_cast<std::ptrdiff_t>(k);
            if (*std::max_element(first, last) == 0.0) continue;
            ++scored;
            hit += static_cast<int>(std::max_element(first, last) - first) == train.labels()[i];
        }
        oob = scored ? static_cast<double>(hit) / static_cast<double>(scored) : 0.0;
    }
    return std::make_shared<ForestModel>(spec, train.class_count(), d, std::move(trees), oob);
}

}  // namespace deepfuse
