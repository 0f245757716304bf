#include "deepfuse/classifiers/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "deepfuse/error.hpp"

namespace deepfuse {

namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kDefaultCap = 1'000'000;

// Rows of Q_ij = y_i y_j K(x_i, x_j), computed on first use.
class QCache {
public:
    QCache(const FeatureMatrix& x, std::span<const int> y, const Kernel& k)
        : x_(x), y_(y), k_(k), rows_(x.rows()), diag_(x.rows()) {
        for (std::size_t i = 0; i < x.rows(); ++i) diag_[i] = k_(x.row(i), x.row(i));
    }

    const std::vector<double>& row(std::size_t i) {
        auto& r = rows_[i];
        if (r.empty()) {
            r.resize(x_.rows());
            for (std::size_t j = 0; j < x_.rows(); ++j) {
                r[j] = static_cast<double>(y_[i] * y_[j]) * k_(x_.row(i), x_.row(j));
            }
        }
        return r;
    }

    double diag(std::size_t i) const { return diag_[i]; }

private:
    const FeatureMatrix& x_;
    std::span<const int> y_;
    Kernel k_;
    std::vector<std::vector<double>> rows_;
    std::vector<double> diag_;
};

}  // namespace

SmoSolution solve_smo(const FeatureMatrix& x, std::span<const int> y, std::span<const double> upper,
                      const Kernel& kernel, const SmoOptions& opt) {
    const std::size_t n = x.rows();
    if (y.size() != n || upper.size() != n) throw ShapeError("SMO labels/bounds do not match rows");
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] != 1 && y[i] != -1) throw ShapeError("SMO labels must be +1/-1");
        if (!(upper[i] > 0.0)) throw ConfigError("SVM C must be positive");
    }
    if (!(opt.tol > 0.0)) throw ConfigError("SVM tol must be positive");

    QCache q(x, y, kernel);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    auto in_up = [&](std::size_t t) { return y[t] == 1 ? alpha[t] < upper[t] : alpha[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return y[t] == 1 ? alpha[t] > 0.0 : alpha[t] < upper[t]; };

    const bool quiet_cap = opt.max_iter > 0;
    const std::size_t cap = quiet_cap ? static_cast<std::size_t>(opt.max_iter) : kDefaultCap;
    SmoSolution sol;
    double gap = 0.0;
    while (true) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n;
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        gap = (i == n || j == n) ? 0.0 : gmax - gmin;
        if (gap < opt.tol) break;
        if (sol.iterations >= cap) {
            if (quiet_cap) break;
            throw ConvergenceError("SMO exceeded " + std::to_string(cap) + " pair updates", gap);
        }
        ++sol.iterations;

        const auto& qi = q.row(i);
        const auto& qj = q.row(j);
        const double ci = upper[i];
        const double cj = upper[j];
        const double old_i = alpha[i];
        const double old_j = alpha[j];
        double& ai = alpha[i];
        double& aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = q.diag(i) + q.diag(j) + 2.0 * qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > ci - cj) {
                if (ai > ci) {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if (aj > cj) {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            double quad = q.diag(i) + q.diag(j) - 2.0 * qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > ci) {
                if (ai > ci) {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if (aj < 0.0) {
                aj = 0.0;
                ai = sum;
            }
            if (sum > cj) {
                if (aj > cj) {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = sum;
            }
        }
        const double di = ai - old_i;
        const double dj = aj - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * di + qj[t] * dj;
    }

    // Bias from free variables, else the middle of the feasible interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= upper[t]) {
            if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    double rho = 0.0;
    if (free_count > 0) {
        rho = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(ub) && std::isfinite(lb)) {
        rho = (ub + lb) / 2.0;
    } else if (std::isfinite(ub)) {
        rho = ub;
    } else if (std::isfinite(lb)) {
        rho = lb;
    }
    sol.alpha = std::move(alpha);
    sol.bias = -rho;
    sol.kkt_gap = gap;
    return sol;
}

Kernel kernel_for(const ClassifierSpec& spec, const FeatureMatrix& x) {
    ParamReader p(spec.family, spec.hyperparams);
    Kernel k;
    switch (spec.family) {
        case Family::SVMLinear: k.kind = KernelKind::Linear; return k;
        case Family::SVMSigmoid: k.kind = KernelKind::Sigmoid; k.coef0 = p.get_real("coef0"); break;
        case Family::SVMRbf: k.kind = KernelKind::Rbf; break;
        default: throw ConfigError("not an SVM family");
    }
    const double d = static_cast<double>(x.cols());
    const HyperValue& g = p.get("gamma");
    if (const auto* s = std::get_if<std::string>(&g)) {
        if (*s == "auto") {
            k.gamma = 1.0 / d;
        } else {
            const auto v = x.values();
            double mean = 0.0;
            for (double t : v) mean += t;
            mean /= static_cast<double>(v.size());
            double var = 0.0;
            for (double t : v) var += (t - mean) * (t - mean);
            var /= static_cast<double>(v.size());
            k.gamma = var > 0.0 ? 1.0 / (d * var) : 1.0;
        }
    } else {
        k.gamma = p.get_real("gamma");
        if (!(k.gamma > 0.0)) throw ConfigError("SVM gamma must be positive");
    }
    return k;
}

SvmModel::SvmModel(ClassifierSpec spec, int class_count, std::size_t feature_count, Kernel kernel,
                   std::vector<Submodel> submodels)
    : FittedModel(std::move(spec), class_count, feature_count), kernel_(kernel), submodels_(std::move(submodels)) {}

std::vector<double> SvmModel::decision_function(const FeatureMatrix& x) const {
    check_features(x);
    const std::size_t d = feature_count();
    const std::size_t m = submodels_.size();
    std::vector<double> out(x.rows() * m);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        for (std::size_t s = 0; s < m; ++s) {
            const auto& sub = submodels_[s];
            double f = sub.bias;
            for (std::size_t v = 0; v < sub.coef.size(); ++v) {
                f += sub.coef[v] * kernel_(std::span<const double>(sub.support.data() + v * d, d), row);
            }
            out[r * m + s] = f;
        }
    }
    return out;
}

std::vector<double> SvmModel::proba_rows(const FeatureMatrix& x) const {
    const std::vector<double> f = decision_function(x);
    const auto k = static_cast<std::size_t>(class_count());
    std::vector<double> out(x.rows() * k);
    if (k == 2) {
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const double p1 = 1.0 / (1.0 + std::exp(-f[r]));
            out[2 * r] = 1.0 - p1;
            out[2 * r + 1] = p1;
        }
        return out;
    }
    std::vector<double> row(k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::copy_n(f.begin() + static_cast<std::ptrdiff_t>(r * k), k, row.begin());
        softmax_inplace(row);
        std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(r * k));
    }
    return out;
}

void SvmModel::write_body(BinaryWriter& w) const {
    w.u64(static_cast<std::uint64_t>(kernel_.kind));
    w.f64(kernel_.gamma);
    w.f64(kernel_.coef0);
    w.u64(submodels_.size());
    for (const auto& s : submodels_) {
        w.reals(s.support);
        w.reals(s.coef);
        w.f64(s.bias);
    }
}

ModelPtr read_svm(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d) {
    Kernel kernel;
    kernel.kind = static_cast<KernelKind>(r.u64());
    kernel.gamma = r.f64();
    kernel.coef0 = r.f64();
    const std::uint64_t m = r.u64();
    if (m != (k == 2 ? 1u : static_cast<std::uint64_t>(k))) throw FormatError("SVM blob submodel count mismatch");
    std::vector<SvmModel::Submodel> subs(m);
    for (auto& s : subs) {
        s.support = r.reals();
        s.coef = r.reals();
        s.bias = r.f64();
        if (s.support.size() != s.coef.size() * d) throw FormatError("SVM blob support shape mismatch");
    }
    return std::make_shared<SvmModel>(std::move(spec), k, d, kernel, std::move(subs));
}

ModelPtr fit_svm(const LabeledDataset& train, const ClassifierSpec& spec) {
    ParamReader p(spec.family, spec.hyperparams);
    const double c = p.get_real("C");
    if (!(c > 0.0)) throw ConfigError("SVM C must be positive");
    SmoOptions opt;
    opt.tol = p.get_real("tol");
    opt.max_iter = p.get_int("max_iter");
    if (opt.max_iter == 0) throw ConfigError("SVM max_iter must be positive or -1");
    const bool balanced = !p.is_none("class_weight");

    const FeatureMatrix& x = train.features();
    const Kernel kernel = kernel_for(spec, x);
    const int classes = train.class_count();
    const std::size_t n = train.rows();
    const std::size_t d = train.cols();
    const std::size_t problems = classes == 2 ? 1 : static_cast<std::size_t>(classes);

    std::vector<SvmModel::Submodel> subs;
    for (std::size_t s = 0; s < problems; ++s) {
        const int positive = classes == 2 ? 1 : static_cast<int>(s);
        std::vector<int> y(n);
        std::size_t pos_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = train.labels()[i] == positive ? 1 : -1;
            pos_count += y[i] == 1;
        }
        std::vector<double> upper(n, c);
        if (balanced) {
            const double wp = static_cast<double>(n) / (2.0 * static_cast<double>(pos_count));
            const double wn = static_cast<double>(n) / (2.0 * static_cast<double>(n - pos_count));
            for (std::size_t i = 0; i < n; ++i) upper[i] = c * (y[i] == 1 ? wp : wn);
        }
        const SmoSolution sol = solve_smo(x, y, upper, kernel, opt);
        SvmModel::Submodel sub;
        sub.bias = sol.bias;
        for (std::size_t i = 0; i < n; ++i) {
            if (sol.alpha[i] > 0.0) {
                auto row = x.row(i);
                sub.support.insert(sub.support.end(), row.begin(), row.end());
                sub.coef.push_back(sol.alpha[i] * y[i]);
            }
        }
        subs.push_back(std::move(sub));
    }
    return std::make_shared<SvmModel>(spec, classes, d, kernel, std::move(subs));
}

}  // namespace deepfuse
