#include "deepfuse/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "deepfuse/error.hpp"
#include "deepfuse/random.hpp"

namespace deepfuse {

MinMaxStats minmax_fit(const FeatureMatrix& train) {
    MinMaxStats s;
    s.y_min.assign(train.row(0).begin(), train.row(0).end());
    s.y_max = s.y_min;
    for (std::size_t r = 1; r < train.rows(); ++r) {
        auto row = train.row(r);
        for (std::size_t c = 0; c < train.cols(); ++c) {
            s.y_min[c] = std::min(s.y_min[c], row[c]);
            s.y_max[c] = std::max(s.y_max[c], row[c]);
        }
    }
    return s;
}

FeatureMatrix minmax_apply(const FeatureMatrix& x, const MinMaxStats& s) {
    if (x.cols() != s.y_min.size() || s.y_min.size() != s.y_max.size()) {
        throw ShapeError("min-max stats cover " + std::to_string(s.y_min.size()) + " columns, matrix has " +
                         std::to_string(x.cols()));
    }
    std::vector<double> out(x.rows() * x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        for (std::size_t c = 0; c < x.cols(); ++c) {
            const double range = s.y_max[c] - s.y_min[c];
            out[r * x.cols() + c] = range > 0.0 ? std::abs((row[c] - s.y_min[c]) / range) : 0.0;
        }
    }
    return FeatureMatrix(x.rows(), x.cols(), std::move(out));
}

PCAModel pca_fit(const FeatureMatrix& train) {
    const std::size_t n = train.rows();
    const std::size_t d = train.cols();
    if (n < 2) {
        throw FitError("PCA needs at least 2 rows, got " + std::to_string(n));
    }
    Eigen::MatrixXd x(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = train(r, c);
        }
    }
    Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw FitError("covariance eigendecomposition failed");
    }
    // Eigen returns ascending eigenvalues.
    const Eigen::VectorXd& values = solver.eigenvalues();
    const Eigen::MatrixXd& vectors = solver.eigenvectors();

    PCAModel m;
    m.mean.assign(mean.data(), mean.data() + d);
    const std::size_t k = (d + 1) / 2;
    for (std::size_t i = 0; i < k; ++i) {
        const Eigen::Index col = static_cast<Eigen::Index>(d - 1 - i);
        std::vector<double> comp(vectors.col(col).data(), vectors.col(col).data() + d);
        std::size_t arg = 0;
        for (std::size_t j = 1; j < d; ++j) {
            if (std::abs(comp[j]) > std::abs(comp[arg])) arg = j;
        }
        if (comp[arg] < 0.0) {
            for (double& v : comp) v = -v;
        }
        m.components.push_back(std::move(comp));
        m.explained_variance.push_back(std::max(values(col), 0.0));
    }
    return m;
}

FeatureMatrix pca_apply(const FeatureMatrix& x, const PCAModel& m) {
    const std::size_t d = m.input_dim();
    if (x.cols() != d) {
        throw ShapeError("PCA model expects " + std::to_string(d) + " columns, matrix has " + std::to_string(x.cols()));
    }
    const std::size_t k = m.output_dim();
    std::vector<double> out(x.rows() * k);
    std::vector<double> centred(d);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        for (std::size_t c = 0; c < d; ++c) centred[c] = row[c] - m.mean[c];
        for (std::size_t j = 0; j < k; ++j) {
            out[r * k + j] = std::inner_product(centred.begin(), centred.end(), m.components[j].begin(), 0.0);
        }
    }
    return FeatureMatrix(x.rows(), k, std::move(out));
}

std::vector<std::size_t> nearest_within(const FeatureMatrix& x, std::size_t row,
                                        const std::vector<std::size_t>& candidates, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(candidates.size());
    auto a = x.row(row);
    for (std::size_t c : candidates) {
        if (c == row) continue;
        auto b = x.row(c);
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double diff = a[j] - b[j];
            s += diff * diff;
        }
        dist.emplace_back(s, c);
    }
    k = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
}

SmoteResult smote_oversample_traced(const LabeledDataset& ds, const SmoteConfig& cfg) {
    if (cfg.k_neighbors < 1) {
        throw ConfigError("SMOTE k_neighbors must be at least 1");
    }
    const auto counts = ds.class_counts();
    const std::size_t target = *std::max_element(counts.begin(), counts.end());
    const std::size_t d = ds.cols();

    std::vector<std::vector<std::size_t>> members(counts.size());
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        members[static_cast<std::size_t>(ds.labels()[i])].push_back(i);
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] < target && counts[c] <= cfg.k_neighbors) {
            throw ConfigError("class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                              " samples; SMOTE needs more than k_neighbors=" + std::to_string(cfg.k_neighbors));
        }
    }

    std::vector<double> values(ds.features().values().begin(), ds.features().values().end());
    std::vector<int> labels = ds.labels();
    std::vector<SyntheticOrigin> origins;
    Rng rng(cfg.seed);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const std::size_t need = target - counts[c];
        if (need == 0) continue;
        std::vector<std::vector<std::size_t>> neighbours(ds.rows());
        for (std::size_t s = 0; s < need; ++s) {
            const std::size_t parent = members[c][rng.below(members[c].size())];
            auto& nn = neighbours[parent];
            if (nn.empty()) nn = nearest_within(ds.features(), parent, members[c], cfg.k_neighbors);
            const std::size_t other = nn[rng.below(nn.size())];
            const double t = rng.uniform();
            auto xi = ds.features().row(parent);
            auto xk = ds.features().row(other);
            for (std::size_t j = 0; j < d; ++j) {
                values.push_back(xi[j] + (xk[j] - xi[j]) * t);
            }
            labels.push_back(static_cast<int>(c));
            origins.push_back({parent, other, t});
        }
    }
    const std::size_t rows = labels.size();
    LabeledDataset out(FeatureMatrix(rows, d, std::move(values)), std::move(labels), ds.class_count(),
                       ds.source_tag());
    return {std::move(out), std::move(origins)};
}

LabeledDataset smote_oversample(const LabeledDataset& ds, const SmoteConfig& cfg) {
    return smote_oversample_traced(ds, cfg).data;
}

}  // namespace deepfuse
