#include "deepfuse/classifiers/mlp.hpp"

#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include "deepfuse/error.hpp"
#include "deepfuse/random.hpp"

namespace deepfuse {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using ConstMap = Eigen::Map<const MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

void activate(MatrixXd& z, Activation act) {
    switch (act) {
        case Activation::Relu: z = z.cwiseMax(0.0); break;
        case Activation::Tanh: z = z.array().tanh().matrix(); break;
        case Activation::Logistic: z = (1.0 / (1.0 + (-z.array()).exp())).matrix(); break;
    }
}

// Derivative expressed through the activation output h.
MatrixXd activation_grad(const MatrixXd& h, Activation act) {
    switch (act) {
        case Activation::Relu: return (h.array() > 0.0).cast<double>().matrix();
        case Activation::Tanh: return (1.0 - h.array().square()).matrix();
        case Activation::Logistic: return (h.array() * (1.0 - h.array())).matrix();
    }
    return h;
}

MatrixXd row_softmax(const MatrixXd& z) {
    MatrixXd p = z;
    for (Index r = 0; r < p.rows(); ++r) {
        const double m = p.row(r).maxCoeff();
        p.row(r) = (p.row(r).array() - m).exp().matrix();
        p.row(r) /= p.row(r).sum();
    }
    return p;
}

}  // namespace

MlpNetwork::MlpNetwork(std::vector<std::size_t> layers, Activation act, MlpLoss loss)
    : layers_(std::move(layers)), act_(act), loss_(loss) {
    if (layers_.size() < 2) throw ConfigError("MLP needs at least an input and an output layer");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        if (layers_[l] == 0 || layers_[l + 1] == 0) throw ConfigError("MLP layer widths must be positive");
        offsets_.push_back(total);
        total += layers_[l] * layers_[l + 1] + layers_[l + 1];
    }
    params_.assign(total, 0.0);
}

void MlpNetwork::initialize(std::uint64_t seed) {
    Rng rng(seed);
    std::fill(params_.begin(), params_.end(), 0.0);
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        const double fan_in = static_cast<double>(layers_[l]);
        const double fan_out = static_cast<double>(layers_[l + 1]);
        const double factor = act_ == Activation::Logistic ? 2.0 : 6.0;
        const double bound = std::sqrt(factor / (fan_in + fan_out));
        double* w = params_.data() + offsets_[l];
        for (std::size_t i = 0; i < layers_[l] * layers_[l + 1]; ++i) w[i] = (2.0 * rng.uniform() - 1.0) * bound;
    }
}

MatrixXd MlpNetwork::forward(const MatrixXd& x) const {
    MatrixXd a = x;
    const std::size_t last = layers_.size() - 2;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        const Index in = static_cast<Index>(layers_[l]);
        const Index out = static_cast<Index>(layers_[l + 1]);
        ConstMap w(params_.data() + offsets_[l], in, out);
        ConstVecMap b(params_.data() + offsets_[l] + layers_[l] * layers_[l + 1], out);
        MatrixXd z = a * w;
        z.rowwise() += b.transpose();
        if (l != last) activate(z, act_);
        a = std::move(z);
    }
    return a;
}

double MlpNetwork::loss_and_gradient(const MatrixXd& x, const MatrixXd& targets, double alpha,
                                     std::vector<double>* grad) const {
    const std::size_t layer_count = layers_.size() - 1;
    const double n = static_cast<double>(x.rows());
    std::vector<MatrixXd> acts;
    acts.reserve(layer_count + 1);
    acts.push_back(x);
    for (std::size_t l = 0; l < layer_count; ++l) {
        const Index in = static_cast<Index>(layers_[l]);
        const Index out = static_cast<Index>(layers_[l + 1]);
        ConstMap w(params_.data() + offsets_[l], in, out);
        ConstVecMap b(params_.data() + offsets_[l] + layers_[l] * layers_[l + 1], out);
        MatrixXd z = acts.back() * w;
        z.rowwise() += b.transpose();
        if (l + 1 != layer_count) activate(z, act_);
        acts.push_back(std::move(z));
    }

    const MatrixXd& out = acts.back();
    double loss = 0.0;
    MatrixXd delta;
    if (loss_ == MlpLoss::SquaredError) {
        const MatrixXd diff = out - targets;
        loss = diff.squaredNorm() / n;
        delta = (2.0 / n) * diff;
    } else {
        const MatrixXd p = row_softmax(out);
        for (Index r = 0; r < p.rows(); ++r) {
            for (Index c = 0; c < p.cols(); ++c) {
                if (targets(r, c) > 0.0) loss -= targets(r, c) * std::log(std::max(p(r, c), 1e-300));
            }
        }
        loss /= n;
        delta = (p - targets) / n;
    }
    double weight_sq = 0.0;
    for (std::size_t l = 0; l < layer_count; ++l) {
        ConstVecMap w(params_.data() + offsets_[l], static_cast<Index>(layers_[l] * layers_[l + 1]));
        weight_sq += w.squaredNorm();
    }
    loss += alpha / (2.0 * n) * weight_sq;

    if (grad) {
        grad->assign(params_.size(), 0.0);
        for (std::size_t l = layer_count; l-- > 0;) {
            const Index in = static_cast<Index>(layers_[l]);
            const Index outw = static_cast<Index>(layers_[l + 1]);
            ConstMap w(params_.data() + offsets_[l], in, outw);
            Eigen::Map<MatrixXd> gw(grad->data() + offsets_[l], in, outw);
            Eigen::Map<Eigen::VectorXd> gb(grad->data() + offsets_[l] + layers_[l] * layers_[l + 1], outw);
            gw = acts[l].transpose() * delta + (alpha / n) * w;
            gb = delta.colwise().sum().transpose();
            if (l > 0) {
                delta = ((delta * w.transpose()).array() * activation_grad(acts[l], act_).array()).matrix();
            }
        }
    }
    return loss;
}

void adam_step(std::vector<double>& theta, const std::vector<double>& grad, AdamState& s, const AdamRates& r) {
    if (s.m.empty()) {
        s.m.assign(theta.size(), 0.0);
        s.v.assign(theta.size(), 0.0);
    }
    ++s.t;
    const double c1 = 1.0 - std::pow(r.beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(r.beta2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        s.m[i] = r.beta1 * s.m[i] + (1.0 - r.beta1) * grad[i];
        s.v[i] = r.beta2 * s.v[i] + (1.0 - r.beta2) * grad[i] * grad[i];
        const double mhat = s.m[i] / c1;
        const double vhat = s.v[i] / c2;
        theta[i] -= r.eta * mhat / (std::sqrt(vhat) + r.epsilon);
    }
}

Eigen::MatrixXd to_eigen(const FeatureMatrix& x) {
    MatrixXd m(static_cast<Index>(x.rows()), static_cast<Index>(x.cols()));
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = x(r, c);
    }
    return m;
}

Eigen::MatrixXd one_hot(const std::vector<int>& labels, int class_count) {
    MatrixXd y = MatrixXd::Zero(static_cast<Index>(labels.size()), class_count);
    for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Index>(i), labels[i]) = 1.0;
    return y;
}

MlpModel::MlpModel(ClassifierSpec spec, int class_count, std::size_t feature_count, MlpNetwork net,
                   std::vector<double> loss_curve)
    : FittedModel(std::move(spec), class_count, feature_count), net_(std::move(net)), loss_curve_(std::move(loss_curve)) {}

std::vector<double> MlpModel::proba_rows(const FeatureMatrix& x) const {
    const MatrixXd p = row_softmax(net_.forward(to_eigen(x)));
    std::vector<double> out(x.rows() * static_cast<std::size_t>(class_count()));
    for (Index r = 0; r < p.rows(); ++r) {
        for (Index c = 0; c < p.cols(); ++c) out[static_cast<std::size_t>(r * p.cols() + c)] = p(r, c);
    }
    return out;
}

void MlpModel::write_body(BinaryWriter& w) const {
    w.sizes(net_.layers());
    w.u64(static_cast<std::uint64_t>(net_.activation()));
    w.u64(static_cast<std::uint64_t>(net_.loss_kind()));
    w.reals(net_.params());
    w.reals(loss_curve_);
}

ModelPtr read_mlp(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d) {
    auto layers = r.sizes();
    const auto act = static_cast<Activation>(r.u64());
    const auto loss = static_cast<MlpLoss>(r.u64());
    if (layers.size() < 2 || layers.front() != d || layers.back() != static_cast<std::size_t>(k)) {
        throw FormatError("MLP blob layer shape mismatch");
    }
    MlpNetwork net(std::move(layers), act, loss);
    auto params = r.reals();
    if (params.size() != net.parameter_count()) throw FormatError("MLP blob parameter count mismatch");
    net.params() = std::move(params);
    auto curve = r.reals();
    return std::make_shared<MlpModel>(std::move(spec), k, d, std::move(net), std::move(curve));
}

namespace {

Activation parse_activation(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "logistic") return Activation::Logistic;
    return Activation::Relu;
}

void check_loss(double loss, std::size_t iter) {
    if (!std::isfinite(loss)) {
        throw TrainingError("MLP loss diverged at iteration " + std::to_string(iter));
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Limited-memory BFGS with a backtracking Armijo line search.
void train_lbfgs(MlpNetwork& net, const MatrixXd& x, const MatrixXd& y, double alpha, std::size_t max_iter,
                 std::vector<double>& curve) {
    constexpr std::size_t kHistory = 10;
    std::vector<double> g;
    double f = net.loss_and_gradient(x, y, alpha, &g);
    check_loss(f, 0);
    std::deque<std::vector<double>> s_hist;
    std::deque<std::vector<double>> y_hist;
    std::vector<double>& theta = net.params();
    for (std::size_t it = 0; it < max_iter; ++it) {
        std::vector<double> q = g;
        std::vector<double> a(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            a[i] = dot(s_hist[i], q) / dot(y_hist[i], s_hist[i]);
            for (std::size_t j = 0; j < q.size(); ++j) q[j] -= a[i] * y_hist[i][j];
        }
        if (!s_hist.empty()) {
            const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
            for (double& v : q) v *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double b = dot(y_hist[i], q) / dot(y_hist[i], s_hist[i]);
            for (std::size_t j = 0; j < q.size(); ++j) q[j] += s_hist[i][j] * (a[i] - b);
        }
        // q approximates H g; the search direction is -q.
        double slope = -dot(g, q);
        if (!(slope < 0.0)) {
            q = g;
            slope = -dot(g, g);
            s_hist.clear();
            y_hist.clear();
        }
        if (slope > -1e-20) break;
        const std::vector<double> start = theta;
        double step = 1.0;
        double f_new = f;
        std::vector<double> g_new;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t j = 0; j < theta.size(); ++j) theta[j] = start[j] - step * q[j];
            f_new = net.loss_and_gradient(x, y, alpha, &g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            theta = start;
            break;
        }
        std::vector<double> s(theta.size());
        std::vector<double> yv(theta.size());
        for (std::size_t j = 0; j < theta.size(); ++j) {
            s[j] = theta[j] - start[j];
            yv[j] = g_new[j] - g[j];
        }
        if (dot(s, yv) > 1e-12) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(yv));
            if (s_hist.size() > kHistory) {
                s_hist.pop_front();
                y_hist.pop_front();
            }
        }
        f = f_new;
        g = std::move(g_new);
        curve.push_back(f);
        if (std::sqrt(dot(g, g)) < 1e-10) break;
    }
}

}  // namespace

ModelPtr fit_mlp(const LabeledDataset& train, const ClassifierSpec& spec) {
    ParamReader p(spec.family, spec.hyperparams);
    const auto hidden = p.get_int_list("hidden_layer_sizes");
    const std::int64_t max_iter = p.get_int("max_iter");
    if (hidden.empty()) throw ConfigError("MLP hidden_layer_sizes must not be empty");
    if (max_iter < 1) throw ConfigError("MLP max_iter must be at least 1");
    const double alpha = p.get_real("alpha");
    const double momentum = p.get_real("momentum");
    AdamRates rates{p.get_real("learning_rate_init"), p.get_real("beta_1"), p.get_real("beta_2"), p.get_real("epsilon")};
    if (!(rates.eta > 0.0) || alpha < 0.0) throw ConfigError("MLP learning_rate_init must be positive, alpha nonnegative");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("MLP momentum must lie in [0, 1)");

    std::vector<std::size_t> layers{train.cols()};
    for (auto h : hidden) {
        if (h < 1) throw ConfigError("MLP hidden layer widths must be positive");
        layers.push_back(static_cast<std::size_t>(h));
    }
    layers.push_back(static_cast<std::size_t>(train.class_count()));
    MlpNetwork net(layers, parse_activation(p.get_string("activation")),
                   p.get_string("loss") == "cross_entropy" ? MlpLoss::CrossEntropy : MlpLoss::SquaredError);
    net.initialize(spec.seed);

    const MatrixXd x = to_eigen(train.features());
    const MatrixXd y = one_hot(train.labels(), train.class_count());
    const std::string& solver = p.get_string("solver");
    const auto iters = static_cast<std::size_t>(max_iter);
    std::vector<double> curve;
    std::vector<double> grad;
    if (solver == "lbfgs") {
        train_lbfgs(net, x, y, alpha, iters, curve);
    } else if (solver == "sgd") {
        std::vector<double> velocity(net.parameter_count(), 0.0);
        for (std::size_t it = 0; it < iters; ++it) {
            const double loss = net.loss_and_gradient(x, y, alpha, &grad);
            check_loss(loss, it);
            curve.push_back(loss);
            auto& theta = net.params();
            for (std::size_t j = 0; j < theta.size(); ++j) {
                velocity[j] = momentum * velocity[j] - rates.eta * grad[j];
                theta[j] += velocity[j];
            }
        }
    } else {
        AdamState state;
        for (std::size_t it = 0; it < iters; ++it) {
            const double loss = net.loss_and_gradient(x, y, alpha, &grad);
            check_loss(loss, it);
            curve.push_back(loss);
            adam_step(net.params(), grad, state, rates);
        }
    }
    const double final_loss = net.loss_and_gradient(x, y, alpha, nullptr);
    check_loss(final_loss, iters);
    for (double v : net.params()) {
        if (!std::isfinite(v)) throw TrainingError("MLP parameters diverged");
    }
    return std::make_shared<MlpModel>(spec, train.class_count(), train.cols(), std::move(net), std::move(curve));
}

}  // namespace deepfuse
