#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "deepfuse/random.hpp"

#ifndef DEEPFUSE_FIXTURE_DIR
#define DEEPFUSE_FIXTURE_DIR "."
#endif

namespace oracle {

Eigen jacobi_eigen(Matrix a) {
    const std::size_t n = a.size();
    Matrix v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p];
                    const double vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i][i] > a[j][j]; });
    Eigen e;
    for (std::size_t i : order) {
        e.values.push_back(a[i][i]);
        std::vector<double> col(n);
        for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
        e.vectors.push_back(col);
    }
    return e;
}

Matrix covariance(const deepfuse::FeatureMatrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) mean[c] += x(r, c) / static_cast<double>(n);
    Matrix cov(d, std::vector<double>(d, 0.0));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) cov[i][j] += (x(r, i) - mean[i]) * (x(r, j) - mean[j]);
    for (auto& row : cov)
        for (double& v : row) v /= static_cast<double>(n - 1);
    return cov;
}

double Lcg::normal() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * uniform());
}

deepfuse::LabeledDataset blobs(std::size_t n, const std::vector<std::vector<double>>& centres, double spread,
                               std::uint64_t seed) {
    Lcg g(seed);
    const std::size_t d = centres.front().size();
    std::vector<double> values;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % centres.size());
        labels.push_back(c);
        for (std::size_t j = 0; j < d; ++j) values.push_back(centres[c][j] + spread * g.normal());
    }
    return deepfuse::LabeledDataset(deepfuse::FeatureMatrix(n, d, std::move(values)), std::move(labels),
                                    static_cast<int>(centres.size()), "blobs");
}

deepfuse::FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Lcg g(seed);
    std::vector<double> v(rows * cols);
    for (double& x : v) x = 2.0 * g.uniform() - 1.0;
    return deepfuse::FeatureMatrix(rows, cols, std::move(v));
}

std::vector<std::size_t> brute_neighbors(const deepfuse::FeatureMatrix& train, std::span<const double> query,
                                         std::size_t k, const std::string& metric, double p) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t r = 0; r < train.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < train.cols(); ++c) {
            const double diff = std::abs(train(r, c) - query[c]);
            if (metric == "manhattan") acc += diff;
            else if (metric == "euclidean") acc += diff * diff;
            else acc += std::pow(diff, p);
        }
        double dist = acc;
        if (metric == "euclidean") dist = std::sqrt(acc);
        else if (metric == "minkowski") dist = std::pow(acc, 1.0 / p);
        all.emplace_back(dist, r);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(all[i].second);
    return out;
}

deepfuse::imgprep::CropBounds largest_component_bounds(const deepfuse::imgprep::Mask& mask, std::size_t h,
                                                       std::size_t w) {
    std::vector<int> label(h * w, -1);
    deepfuse::imgprep::CropBounds best{};
    std::size_t best_area = 0;
    int next = 0;
    for (std::size_t start = 0; start < h * w; ++start) {
        if (!mask[start] || label[start] >= 0) continue;
        deepfuse::imgprep::CropBounds b{start / w, start / w, start % w, start % w};
        std::size_t area = 0;
        std::deque<std::size_t> queue{start};
        label[start] = next;
        while (!queue.empty()) {
            const std::size_t cur = queue.front();
            queue.pop_front();
            ++area;
            const std::size_t r = cur / w;
            const std::size_t c = cur % w;
            b.top = std::min(b.top, r);
            b.bottom = std::max(b.bottom, r);
            b.left = std::min(b.left, c);
            b.right = std::max(b.right, c);
            const long dr[4] = {-1, 1, 0, 0};
            const long dc[4] = {0, 0, -1, 1};
            for (int k = 0; k < 4; ++k) {
                const long nr = static_cast<long>(r) + dr[k];
                const long nc = static_cast<long>(c) + dc[k];
                if (nr < 0 || nc < 0 || nr >= static_cast<long>(h) || nc >= static_cast<long>(w)) continue;
                const std::size_t idx = static_cast<std::size_t>(nr) * w + static_cast<std::size_t>(nc);
                if (mask[idx] && label[idx] < 0) {
                    label[idx] = next;
                    queue.push_back(idx);
                }
            }
        }
        if (area > best_area) {
            best_area = area;
            best = b;
        }
        ++next;
    }
    return best;
}

double kkt_residual(const deepfuse::FeatureMatrix& x, std::span<const int> y, std::span<const double> upper,
                    const deepfuse::Kernel& k, const deepfuse::SmoSolution& s) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double f = s.bias;
        for (std::size_t j = 0; j < x.rows(); ++j) {
            if (s.alpha[j] != 0.0) f += s.alpha[j] * y[j] * k(x.row(j), x.row(i));
        }
        const double margin = y[i] * f;
        double v = 0.0;
        if (s.alpha[i] <= 0.0) v = std::max(0.0, 1.0 - margin);
        else if (s.alpha[i] >= upper[i]) v = std::max(0.0, margin - 1.0);
        else v = std::abs(margin - 1.0);
        worst = std::max(worst, v);
    }
    return worst;
}

double weighted_error(const deepfuse::DecisionTree& stump, const deepfuse::FeatureMatrix& x,
                      const std::vector<int>& y, const std::vector<double>& weights) {
    double err = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        total += weights[i];
        if (stump.predict(x.row(i)) != y[i]) err += weights[i];
    }
    return err / total;
}

std::vector<std::size_t> fold_assignment(const std::vector<int>& labels, int k, std::size_t folds,
                                         std::uint64_t seed) {
    deepfuse::Rng rng(seed);
    std::vector<std::size_t> fold(labels.size());
    std::size_t deal = 0;
    for (int c = 0; c < k; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) members.push_back(i);
        rng.shuffle(members);
        for (std::size_t i : members) fold[i] = (deal++) % folds;
    }
    return fold;
}

std::size_t exhaustive_cv_winner(const deepfuse::LabeledDataset& train, deepfuse::Family family,
                                 const std::vector<deepfuse::HyperParams>& configs, std::size_t folds,
                                 std::uint64_t seed, std::vector<CvScore>* scores) {
    const auto fold = fold_assignment(train.labels(), train.class_count(), folds, seed);
    std::size_t best = 0;
    CvScore best_score{-1.0, 0.0};
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const std::uint64_t trial_seed = deepfuse::derive_seed(seed, i);
        std::vector<double> accs;
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<std::size_t> tr;
            std::vector<std::size_t> te;
            for (std::size_t r = 0; r < train.rows(); ++r) (fold[r] == f ? te : tr).push_back(r);
            const auto fit_ds = train.take_rows(tr);
            const auto model =
                deepfuse::fit(fit_ds, deepfuse::ClassifierSpec{family, configs[i], deepfuse::derive_seed(trial_seed, f)});
            const auto pred = model->predict(train.features().take_rows(te));
            std::size_t hit = 0;
            for (std::size_t j = 0; j < te.size(); ++j) hit += pred[j] == train.labels()[te[j]];
            accs.push_back(static_cast<double>(hit) / static_cast<double>(te.size()));
        }
        double mean = 0.0;
        for (double a : accs) mean += a;
        mean /= static_cast<double>(accs.size());
        double var = 0.0;
        for (double a : accs) var += (a - mean) * (a - mean);
        const CvScore s{mean, std::sqrt(var / static_cast<double>(accs.size()))};
        if (scores) scores->push_back(s);
        if (s.mean > best_score.mean || (s.mean == best_score.mean && s.std < best_score.std)) {
            best = i;
            best_score = s;
        }
    }
    return best;
}

int count_vote(const std::vector<int>& member_preds, const std::vector<std::vector<double>>& member_proba) {
    std::vector<int> labels;
    for (int p : member_preds)
        if (std::find(labels.begin(), labels.end(), p) == labels.end()) labels.push_back(p);
    std::size_t top = 0;
    for (int l : labels) top = std::max<std::size_t>(top, std::count(member_preds.begin(), member_preds.end(), l));
    std::vector<int> tied;
    for (int l : labels)
        if (static_cast<std::size_t>(std::count(member_preds.begin(), member_preds.end(), l)) == top) tied.push_back(l);
    if (tied.size() == 1) return tied.front();
    double best = -1.0;
    std::vector<int> still;
    for (int l : tied) {
        double m = 0.0;
        for (const auto& p : member_proba) m += p[static_cast<std::size_t>(l)];
        m /= static_cast<double>(member_proba.size());
        if (m > best) {
            best = m;
            still = {l};
        } else if (m == best) {
            still.push_back(l);
        }
    }
    if (still.size() == 1) return still.front();
    for (int p : member_preds)
        if (std::find(still.begin(), still.end(), p) != still.end()) return p;
    return still.front();
}

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("deepfuse_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(DEEPFUSE_FIXTURE_DIR) / name; }

}  // namespace oracle
