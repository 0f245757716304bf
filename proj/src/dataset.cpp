#include "deepfuse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "deepfuse/error.hpp"
#include "deepfuse/random.hpp"

namespace deepfuse {

LabeledDataset::LabeledDataset(FeatureMatrix features, std::vector<int> labels, int class_count,
                               std::string source_tag)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      class_count_(class_count),
      source_tag_(std::move(source_tag)) {
    if (labels_.size() != features_.rows()) {
        throw ConsistencyError(std::to_string(labels_.size()) + " labels for " + std::to_string(features_.rows()) +
                               " rows");
    }
    if (class_count_ < 1) {
        throw ConsistencyError("class count must be positive");
    }
    std::vector<std::size_t> seen(static_cast<std::size_t>(class_count_), 0);
    for (int label : labels_) {
        if (label < 0 || label >= class_count_) {
            throw ConsistencyError("label " + std::to_string(label) + " outside 0.." +
                                   std::to_string(class_count_ - 1));
        }
        ++seen[static_cast<std::size_t>(label)];
    }
    for (std::size_t k = 0; k < seen.size(); ++k) {
        if (seen[k] == 0) {
            throw ConsistencyError("class " + std::to_string(k) + " has no samples");
        }
    }
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(class_count_), 0);
    for (int label : labels_) {
        ++counts[static_cast<std::size_t>(label)];
    }
    return counts;
}

LabeledDataset LabeledDataset::take_rows(std::span<const std::size_t> indices) const {
    std::vector<int> labels;
    labels.reserve(indices.size());
    for (std::size_t idx : indices) {
        labels.push_back(labels_.at(idx));
    }
    return LabeledDataset(features_.take_rows(indices), std::move(labels), class_count_, source_tag_);
}

LabeledDataset LabeledDataset::with_features(FeatureMatrix features) const {
    return LabeledDataset(std::move(features), labels_, class_count_, source_tag_);
}

LabeledDataset LabeledDataset::with_tag(std::string tag) const {
    return LabeledDataset(features_, labels_, class_count_, std::move(tag));
}

LabelEncoding encode_labels(std::span<const std::int64_t> raw) {
    LabelEncoding enc;
    enc.classes.assign(raw.begin(), raw.end());
    std::sort(enc.classes.begin(), enc.classes.end());
    enc.classes.erase(std::unique(enc.classes.begin(), enc.classes.end()), enc.classes.end());
    enc.dense.reserve(raw.size());
    for (std::int64_t v : raw) {
        auto it = std::lower_bound(enc.classes.begin(), enc.classes.end(), v);
        enc.dense.push_back(static_cast<int>(it - enc.classes.begin()));
    }
    return enc;
}

SplitIndices split_indices(std::span<const int> labels, int class_count, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw SplitError("train fraction must lie in (0, 1)");
    }
    const std::size_t n = labels.size();
    Rng rng(spec.seed);
    std::vector<char> in_train(n, 0);

    if (spec.stratified) {
        std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(class_count));
        for (std::size_t i = 0; i < n; ++i) {
            members[static_cast<std::size_t>(labels[i])].push_back(i);
        }
        std::vector<std::size_t> quota(members.size());
        std::size_t assigned = 0;
        for (std::size_t k = 0; k < members.size(); ++k) {
            const std::size_t size = members[k].size();
            if (size < 2) {
                throw SplitError("class " + std::to_string(k) + " has " + std::to_string(size) +
                                 " sample(s); stratification needs at least 2");
            }
            auto q = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(size) + 1e-9));
            quota[k] = std::clamp<std::size_t>(q, 1, size - 1);
            assigned += quota[k];
        }
        auto target = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n) + 1e-9));
        std::vector<std::size_t> order(members.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return members[a].size() > members[b].size(); });
        for (std::size_t pass = 0; assigned < target && pass < order.size(); ++pass) {
            std::size_t k = order[pass];
            if (quota[k] + 1 < members[k].size()) {
                ++quota[k];
                ++assigned;
            }
        }
        for (std::size_t k = 0; k < members.size(); ++k) {
            rng.shuffle(members[k]);
            for (std::size_t i = 0; i < quota[k]; ++i) {
                in_train[members[k][i]] = 1;
            }
        }
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        auto target = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n) + 1e-9));
        for (std::size_t i = 0; i < target; ++i) {
            in_train[order[i]] = 1;
        }
    }

    SplitIndices out;
    for (std::size_t i = 0; i < n; ++i) {
        (in_train[i] ? out.train : out.test).push_back(i);
    }
    return out;
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, const SplitSpec& spec) {
    SplitIndices idx = split_indices(ds.labels(), ds.class_count(), spec);
    try {
        return {ds.take_rows(idx.train), ds.take_rows(idx.test)};
    } catch (const ConsistencyError& e) {
        throw SplitError(std::string("partition lost a class: ") + e.what());
    }
}

LabeledDataset concat_columns(std::span<const LabeledDataset> sets) {
    if (sets.empty()) {
        throw AlignmentError("nothing to concatenate");
    }
    const LabeledDataset& first = sets.front();
    if (sets.size() == 1) {
        return first;
    }
    std::size_t total_cols = 0;
    std::string tag;
    for (std::size_t s = 0; s < sets.size(); ++s) {
        const auto& ds = sets[s];
        if (ds.rows() != first.rows()) {
            throw AlignmentError("set '" + ds.source_tag() + "' has " + std::to_string(ds.rows()) +
                                 " rows, expected " + std::to_string(first.rows()));
        }
        if (ds.labels() != first.labels() || ds.class_count() != first.class_count()) {
            throw AlignmentError("labels of '" + ds.source_tag() + "' differ from '" + first.source_tag() + "'");
        }
        total_cols += ds.cols();
        if (s > 0) {
            tag += "+";
        }
        tag += ds.source_tag();
    }
    std::vector<double> values(first.rows() * total_cols);
    std::size_t offset = 0;
    for (const auto& ds : sets) {
        const std::size_t w = ds.cols();
        for (std::size_t r = 0; r < ds.rows(); ++r) {
            auto src = ds.features().row(r);
            std::copy(src.begin(), src.end(), values.begin() + static_cast<std::ptrdiff_t>(r * total_cols + offset));
        }
        offset += w;
    }
    return LabeledDataset(FeatureMatrix(first.rows(), total_cols, std::move(values)), first.labels(),
                          first.class_count(), std::move(tag));
}

}  // namespace deepfuse
