#include "deepfuse/classifiers/gbt.hpp"

#include <algorithm>
#include <cmath>

#include "deepfuse/error.hpp"
#include "deepfuse/random.hpp"

namespace deepfuse {

namespace {

struct TreeBuilder {
    const FeatureMatrix& x;
    std::span<const double> g;
    std::span<const double> h;
    const RegressionTreeParams& p;
    std::vector<RegressionTree::Node>& nodes;

    double score(double gs, double hs) const { return gs * gs / (hs + p.lambda); }

    int build(std::vector<std::size_t>& rows, int depth) {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        double gsum = 0.0;
        double hsum = 0.0;
        for (std::size_t i : rows) {
            gsum += g[i];
            hsum += h[i];
        }
        nodes[static_cast<std::size_t>(id)].value = -p.learning_rate * gsum / (hsum + p.lambda);
        if (depth >= p.max_depth || rows.size() < 2) return id;

        const double parent = score(gsum, hsum);
        double best_gain = 0.0;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;
        for (std::size_t f = 0; f < x.cols(); ++f) {
            std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
                return x(a, f) < x(b, f) || (x(a, f) == x(b, f) && a < b);
            });
            double gl = 0.0;
            double hl = 0.0;
            for (std::size_t pos = 0; pos + 1 < rows.size(); ++pos) {
                gl += g[rows[pos]];
                hl += h[rows[pos]];
                const double a = x(rows[pos], f);
                const double b = x(rows[pos + 1], f);
                if (a == b) continue;
                const double hr = hsum - hl;
                if (hl < p.min_child_weight || hr < p.min_child_weight) continue;
                const double gain = 0.5 * (score(gl, hl) + score(gsum - gl, hr) - parent);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = a + (b - a) / 2.0;
                    if (!(best_threshold >= a && best_threshold < b)) best_threshold = a;
                    found = true;
                }
            }
        }
        if (!found) return id;
        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t i : rows) (x(i, best_feature) <= best_threshold ? left : right).push_back(i);
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        auto& node = nodes[static_cast<std::size_t>(id)];
        node.feature = static_cast<int>(best_feature);
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Mean log-loss of raw scores (n x m, m = 1 for two classes).
double log_loss(const std::vector<double>& f, const std::vector<int>& y, std::size_t m) {
    double total = 0.0;
    const std::size_t n = y.size();
    if (m == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            // log(1 + e^-z) for the true class, computed stably.
            const double z = y[i] == 1 ? f[i] : -f[i];
            total += z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = f.data() + i * m;
            const double mx = *std::max_element(row, row + m);
            double s = 0.0;
            for (std::size_t c = 0; c < m; ++c) s += std::exp(row[c] - mx);
            total += mx + std::log(s) - row[static_cast<std::size_t>(y[i])];
        }
    }
    return total / static_cast<double>(n);
}

}  // namespace

RegressionTree RegressionTree::fit(const FeatureMatrix& x, std::span<const double> grad, std::span<const double> hess,
                                   std::vector<std::size_t> rows, const RegressionTreeParams& p) {
    if (rows.empty()) throw FitError("regression tree needs at least one row");
    RegressionTree t;
    TreeBuilder b{x, grad, hess, p, t.nodes_};
    b.build(rows, 0);
    return t;
}

double RegressionTree::predict(std::span<const double> row) const {
    std::size_t id = 0;
    while (nodes_[id].feature >= 0) {
        const auto& n = nodes_[id];
        id = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[id].value;
}

void RegressionTree::write(BinaryWriter& w) const {
    w.u64(nodes_.size());
    for (const auto& n : nodes_) {
        w.i64(n.feature);
        w.f64(n.threshold);
        w.i64(n.left);
        w.i64(n.right);
        w.f64(n.value);
    }
}

RegressionTree RegressionTree::read(BinaryReader& r, std::size_t feature_count) {
    RegressionTree t;
    const std::uint64_t n = r.u64();
    if (n == 0 || n > (std::uint64_t{1} << 32)) throw FormatError("regression tree blob node count out of range");
    t.nodes_.resize(n);
    for (auto& node : t.nodes_) {
        node.feature = static_cast<int>(r.i64());
        node.threshold = r.f64();
        node.left = static_cast<int>(r.i64());
        node.right = static_cast<int>(r.i64());
        node.value = r.f64();
    }
    for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
        const auto& node = t.nodes_[i];
        if (node.feature < 0) continue;
        if (static_cast<std::size_t>(node.feature) >= feature_count || node.left <= static_cast<int>(i) ||
            node.right <= static_cast<int>(i) || static_cast<std::uint64_t>(node.left) >= n ||
            static_cast<std::uint64_t>(node.right) >= n) {
            throw FormatError("regression tree blob has invalid links");
        }
    }
    return t;
}

GbtModel::GbtModel(ClassifierSpec spec, int class_count, std::size_t feature_count, std::vector<double> base,
                   std::vector<std::vector<RegressionTree>> stages, std::vector<double> loss_history)
    : FittedModel(std::move(spec), class_count, feature_count),
      base_(std::move(base)),
      stages_(std::move(stages)),
      loss_history_(std::move(loss_history)) {}

std::vector<double> GbtModel::raw_scores(const FeatureMatrix& x) const {
    check_features(x);
    const std::size_t m = base_.size();
    std::vector<double> f(x.rows() * m);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < m; ++c) {
            double s = base_[c];
            for (const auto& stage : stages_) s += stage[c].predict(x.row(r));
            f[r * m + c] = s;
        }
    }
    return f;
}

std::vector<double> GbtModel::proba_rows(const FeatureMatrix& x) const {
    std::vector<double> f = raw_scores(x);
    const auto k = static_cast<std::size_t>(class_count());
    if (base_.size() == 1) {
        std::vector<double> out(x.rows() * 2);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const double p1 = sigmoid(f[r]);
            out[2 * r] = 1.0 - p1;
            out[2 * r + 1] = p1;
        }
        return out;
    }
    std::vector<double> row(k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::copy_n(f.begin() + static_cast<std::ptrdiff_t>(r * k), k, row.begin());
        softmax_inplace(row);
        std::copy(row.begin(), row.end(), f.begin() + static_cast<std::ptrdiff_t>(r * k));
    }
    return f;
}

void GbtModel::write_body(BinaryWriter& w) const {
    w.reals(base_);
    w.reals(loss_history_);
    w.u64(stages_.size());
    for (const auto& stage : stages_) {
        for (const auto& t : stage) t.write(w);
    }
}

ModelPtr read_gbt(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d) {
    auto base = r.reals();
    if (base.size() != (k == 2 ? 1u : static_cast<std::size_t>(k))) throw FormatError("GBT blob base shape mismatch");
    auto history = r.reals();
    const std::uint64_t n = r.u64();
    if (n > 1'000'000) throw FormatError("GBT blob stage count out of range");
    std::vector<std::vector<RegressionTree>> stages(n);
    for (auto& stage : stages) {
        for (std::size_t c = 0; c < base.size(); ++c) stage.push_back(RegressionTree::read(r, d));
    }
    return std::make_shared<GbtModel>(std::move(spec), k, d, std::move(base), std::move(stages), std::move(history));
}

ModelPtr fit_gbt(const LabeledDataset& train, const ClassifierSpec& spec) {
    ParamReader p(spec.family, spec.hyperparams);
    RegressionTreeParams tp;
    const auto depth = p.get_int("max_depth");
    const auto n_estimators = p.get_int("n_estimators");
    tp.learning_rate = p.get_real("learning_rate");
    tp.lambda = p.get_real("reg_lambda");
    tp.min_child_weight = p.get_real("min_child_weight");
    const double subsample = p.get_real("subsample");
    if (depth < 0) throw ConfigError("GBT max_depth must be nonnegative");
    if (n_estimators < 1) throw ConfigError("GBT n_estimators must be at least 1");
    if (!(tp.learning_rate > 0.0)) throw ConfigError("GBT learning_rate must be positive");
    if (!(subsample > 0.0 && subsample <= 1.0)) throw ConfigError("GBT subsample must lie in (0, 1]");
    if (tp.lambda < 0.0 || tp.min_child_weight < 0.0) throw ConfigError("GBT reg_lambda and min_child_weight must be nonnegative");
    tp.max_depth = static_cast<int>(depth);

    const std::size_t n = train.rows();
    const auto k = static_cast<std::size_t>(train.class_count());
    const std::size_t m = k == 2 ? 1 : k;
    const auto counts = train.class_counts();
    const auto& y = train.labels();
    const FeatureMatrix& x = train.features();

    std::vector<double> base(m);
    if (m == 1) {
        base[0] = std::log(static_cast<double>(counts[1]) / static_cast<double>(counts[0]));
    } else {
        for (std::size_t c = 0; c < k; ++c) base[c] = std::log(static_cast<double>(counts[c]) / static_cast<double>(n));
    }
    std::vector<double> f(n * m);
    for (std::size_t i = 0; i < n; ++i) std::copy(base.begin(), base.end(), f.begin() + static_cast<std::ptrdiff_t>(i * m));

    std::vector<double> history{log_loss(f, y, m)};
    std::vector<std::vector<RegressionTree>> stages;
    Rng rng(spec.seed);
    const auto take = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(subsample * static_cast<double>(n))));
    std::vector<double> grad(n);
    std::vector<double> hess(n);
    std::vector<double> prob(n * m);
    for (std::int64_t s = 0; s < n_estimators; ++s) {
        std::vector<std::size_t> rows;
        if (take >= n) {
            rows.resize(n);
            for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        } else {
            rows = rng.sample_without_replacement(n, take);
            std::sort(rows.begin(), rows.end());
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (m == 1) {
                prob[i] = sigmoid(f[i]);
            } else {
                std::vector<double> row(f.begin() + static_cast<std::ptrdiff_t>(i * m),
                                        f.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
                softmax_inplace(row);
                std::copy(row.begin(), row.end(), prob.begin() + static_cast<std::ptrdiff_t>(i * m));
            }
        }
        std::vector<RegressionTree> stage;
        for (std::size_t c = 0; c < m; ++c) {
            const int target = m == 1 ? 1 : static_cast<int>(c);
            for (std::size_t i = 0; i < n; ++i) {
                const double pc = prob[i * m + c];
                grad[i] = pc - (y[i] == target ? 1.0 : 0.0);
                hess[i] = std::max(pc * (1.0 - pc), 1e-16);
            }
            stage.push_back(RegressionTree::fit(x, grad, hess, rows, tp));
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < m; ++c) f[i * m + c] += stage[c].predict(x.row(i));
        }
        stages.push_back(std::move(stage));
        history.push_back(log_loss(f, y, m));
    }
    return std::make_shared<GbtModel>(spec, train.class_count(), train.cols(), std::move(base), std::move(stages),
                                      std::move(history));
}

}  // namespace deepfuse
