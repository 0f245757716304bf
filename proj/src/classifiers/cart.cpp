#include "deepfuse/classifiers/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deepfuse/error.hpp"

namespace deepfuse {

double impurity(SplitCriterion c, std::span<const double> w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    if (c == SplitCriterion::Gini) {
        for (double v : w) s += (v / total) * (v / total);
        return 1.0 - s;
    }
    for (double v : w) {
        if (v > 0.0) {
            const double p = v / total;
            s -= p * std::log2(p);
        }
    }
    return s;
}

namespace {

struct Builder {
    const FeatureMatrix& x;
    std::span<const int> y;
    std::size_t k;
    std::span<const double> w;
    const CartParams& params;
    Rng* rng;
    std::vector<DecisionTree::Node>& nodes;

    std::vector<double> histogram(const std::vector<std::size_t>& rows) const {
        std::vector<double> h(k, 0.0);
        for (std::size_t i : rows) h[static_cast<std::size_t>(y[i])] += w[i];
        return h;
    }

    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double score = 0.0;  // weighted child impurity, lower is better
    };

    // Best threshold on one feature; `constant` reports a feature with a single value in the node.
    Split best_on_feature(std::vector<std::size_t>& rows, std::size_t f, const std::vector<double>& parent,
                          bool& constant) const {
        std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
            return x(a, f) < x(b, f) || (x(a, f) == x(b, f) && a < b);
        });
        Split best;
        constant = x(rows.front(), f) == x(rows.back(), f);
        if (constant) return best;
        std::vector<double> left(k, 0.0);
        std::vector<double> right = parent;
        const double total = std::accumulate(parent.begin(), parent.end(), 0.0);
        double wl = 0.0;
        for (std::size_t pos = 0; pos + 1 < rows.size(); ++pos) {
            const std::size_t i = rows[pos];
            const auto c = static_cast<std::size_t>(y[i]);
            left[c] += w[i];
            right[c] -= w[i];
            wl += w[i];
            const double a = x(i, f);
            const double b = x(rows[pos + 1], f);
            if (a == b) continue;
            const std::size_t n_left = pos + 1;
            const std::size_t n_right = rows.size() - n_left;
            if (n_left < params.min_samples_leaf || n_right < params.min_samples_leaf) continue;
            const double wr = total - wl;
            const double score =
                (wl * impurity(params.criterion, left) + wr * impurity(params.criterion, right)) / total;
            if (!best.found || score < best.score) {
                double thr = a + (b - a) / 2.0;
                if (!(thr >= a && thr < b)) thr = a;
                best = {true, f, thr, score};
            }
        }
        return best;
    }

    int build(std::vector<std::size_t> rows, int depth) {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        std::vector<double> hist = histogram(rows);
        const double total = std::accumulate(hist.begin(), hist.end(), 0.0);
        const double node_impurity = impurity(params.criterion, hist);
        {
            std::vector<double> dist = hist;
            for (double& v : dist) v /= total;
            nodes[static_cast<std::size_t>(id)].distribution = std::move(dist);
        }
        const bool depth_ok = params.max_depth < 0 || depth < params.max_depth;
        if (node_impurity <= 0.0 || !depth_ok || rows.size() < params.min_samples_split ||
            rows.size() < 2 * params.min_samples_leaf) {
            return id;
        }

        const std::size_t d = x.cols();
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), std::size_t{0});
        const bool restricted = params.max_features > 0 && params.max_features < d;
        if (restricted) rng->shuffle(order);
        const std::size_t wanted = restricted ? params.max_features : d;

        Split best;
        std::size_t tried = 0;
        for (std::size_t f : order) {
            if (tried >= wanted) break;
            bool constant = false;
            Split s = best_on_feature(rows, f, hist, constant);
            // Constant features do not count towards the per-node budget.
            if (constant) continue;
            ++tried;
            if (s.found && (!best.found || s.score < best.score)) best = s;
        }
        if (!best.found || best.score > node_impurity + 1e-12) return id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t i : rows) (x(i, best.feature) <= best.threshold ? left : right).push_back(i);
        rows.clear();
        rows.shrink_to_fit();
        const int l = build(std::move(left), depth + 1);
        const int r = build(std::move(right), depth + 1);
        auto& node = nodes[static_cast<std::size_t>(id)];
        node.feature = static_cast<int>(best.feature);
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }
};

}  // namespace

DecisionTree DecisionTree::fit(const FeatureMatrix& x, std::span<const int> y, int class_count,
                               std::span<const double> weights, const CartParams& params, Rng* rng) {
    if (y.size() != x.rows() || weights.size() != x.rows()) throw ShapeError("tree labels/weights do not match rows");
    if (params.min_samples_split < 2 || params.min_samples_leaf < 1) {
        throw ConfigError("min_samples_split must be >= 2 and min_samples_leaf >= 1");
    }
    if (params.max_features > 0 && params.max_features < x.cols() && rng == nullptr) {
        throw ConfigError("feature subsampling needs a random source");
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (weights[i] < 0.0 || !std::isfinite(weights[i])) throw FitError("sample weights must be finite and nonnegative");
        if (weights[i] > 0.0) rows.push_back(i);
    }
    if (rows.empty()) throw FitError("all sample weights are zero");
    DecisionTree tree;
    Builder b{x, y, static_cast<std::size_t>(class_count), weights, params, rng, tree.nodes_};
    b.build(std::move(rows), 0);
    return tree;
}

std::span<const double> DecisionTree::distribution(std::span<const double> row) const {
    std::size_t id = 0;
    while (nodes_[id].feature >= 0) {
        const auto& n = nodes_[id];
        id = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[id].distribution;
}

int DecisionTree::predict(std::span<const double> row) const {
    auto d = distribution(row);
    return static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
}

int DecisionTree::depth() const {
    std::vector<int> depth(nodes_.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        best = std::max(best, depth[i]);
        if (nodes_[i].feature >= 0) {
            depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
            depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
        }
    }
    return best;
}

void DecisionTree::write(BinaryWriter& w) const {
    w.u64(nodes_.size());
    for (const auto& n : nodes_) {
        w.i64(n.feature);
        w.f64(n.threshold);
        w.i64(n.left);
        w.i64(n.right);
        w.reals(n.distribution);
    }
}

DecisionTree DecisionTree::read(BinaryReader& r, int class_count, std::size_t feature_count) {
    DecisionTree t;
    const std::uint64_t n = r.u64();
    if (n == 0 || n > (std::uint64_t{1} << 32)) throw FormatError("tree blob node count out of range");
    t.nodes_.resize(n);
    for (auto& node : t.nodes_) {
        node.feature = static_cast<int>(r.i64());
        node.threshold = r.f64();
        node.left = static_cast<int>(r.i64());
        node.right = static_cast<int>(r.i64());
        node.distribution = r.reals();
        if (node.distribution.size() != static_cast<std::size_t>(class_count)) throw FormatError("tree blob leaf shape");
    }
    for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
        const auto& node = t.nodes_[i];
        if (node.feature < 0) continue;
        if (static_cast<std::size_t>(node.feature) >= feature_count || node.left <= static_cast<int>(i) ||
            node.right <= static_cast<int>(i) || static_cast<std::uint64_t>(node.left) >= n ||
            static_cast<std::uint64_t>(node.right) >= n) {
            throw FormatError("tree blob has invalid links");
        }
    }
    return t;
}

}  // namespace deepfuse
