#include "deepfuse/classifiers/hyperparams.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <string>

#include "deepfuse/error.hpp"

namespace deepfuse {

std::string_view family_name(Family f) {
    switch (f) {
        case Family::GBT: return "GBT";
        case Family::MLP: return "MLP";
        case Family::GaussianNB: return "GaussianNB";
        case Family::AdaBoost: return "AdaBoost";
        case Family::KNN: return "KNN";
        case Family::RandomForest: return "RandomForest";
        case Family::SVMLinear: return "SVM_linear";
        case Family::SVMSigmoid: return "SVM_sigmoid";
        case Family::SVMRbf: return "SVM_RBF";
    }
    return "?";
}

std::string_view table_name(Family f) {
    switch (f) {
        case Family::GBT: return "XGBoost";
        case Family::AdaBoost: return "Adaboost";
        case Family::RandomForest: return "RFClassifier";
        default: return family_name(f);
    }
}

Family parse_family(std::string_view name) {
    for (Family f : kAllFamilies) {
        if (name == family_name(f) || name == table_name(f)) return f;
    }
    throw ConfigError("unknown classifier family '" + std::string(name) + "'");
}

ValueKind kind_of(const HyperValue& v) { return static_cast<ValueKind>(v.index()); }

namespace {

std::string format_real(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_int(std::string_view s, std::int64_t& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty();
}

bool parse_real(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty();
}

std::vector<std::string_view> split_items(std::string_view body) {
    std::vector<std::string_view> items;
    while (!body.empty()) {
        auto pos = body.find(',');
        std::string_view item = trim(body.substr(0, pos));
        if (!item.empty()) items.push_back(item);
        if (pos == std::string_view::npos) break;
        body.remove_prefix(pos + 1);
    }
    return items;
}

}  // namespace

std::string format_value(const HyperValue& v) {
    switch (kind_of(v)) {
        case ValueKind::None: return "None";
        case ValueKind::Bool: return std::get<bool>(v) ? "True" : "False";
        case ValueKind::Int: return std::to_string(std::get<std::int64_t>(v));
        case ValueKind::Real: return format_real(std::get<double>(v));
        case ValueKind::String: return std::get<std::string>(v);
        case ValueKind::IntList: {
            const auto& l = std::get<std::vector<std::int64_t>>(v);
            std::string s = "(";
            for (std::size_t i = 0; i < l.size(); ++i) {
                if (i) s += ',';
                s += std::to_string(l[i]);
            }
            if (l.size() == 1) s += ',';
            return s + ")";
        }
        case ValueKind::RealList: {
            const auto& l = std::get<std::vector<double>>(v);
            std::string s = "[";
            for (std::size_t i = 0; i < l.size(); ++i) {
                if (i) s += ',';
                s += format_real(l[i]);
            }
            return s + "]";
        }
    }
    return {};
}

HyperValue parse_value(std::string_view text) {
    text = trim(text);
    if (text == "None") return NoneValue{};
    if (text == "True") return true;
    if (text == "False") return false;
    std::int64_t i = 0;
    if (parse_int(text, i)) return i;
    double d = 0.0;
    if (parse_real(text, d)) return d;
    if (text.size() >= 2 && text.front() == '(' && text.back() == ')') {
        std::vector<std::int64_t> list;
        for (auto item : split_items(text.substr(1, text.size() - 2))) {
            if (!parse_int(item, i)) throw ConfigError("tuple entry '" + std::string(item) + "' is not an integer");
            list.push_back(i);
        }
        return list;
    }
    if (text.size() >= 2 && text.front() == '[' && text.back() == ']') {
        std::vector<double> list;
        for (auto item : split_items(text.substr(1, text.size() - 2))) {
            if (!parse_real(item, d)) throw ConfigError("list entry '" + std::string(item) + "' is not a number");
            list.push_back(d);
        }
        return list;
    }
    return std::string(text);
}

std::string format_params(const HyperParams& p) {
    std::string s;
    for (const auto& [name, value] : p) {
        if (!s.empty()) s += ';';
        s += name + "=" + format_value(value);
    }
    return s;
}

namespace {

using K = ValueKind;

ParamDecl real_param(std::string name, double def) { return {std::move(name), {K::Real}, def, {}}; }
ParamDecl int_param(std::string name, std::int64_t def) { return {std::move(name), {K::Int}, def, {}}; }
ParamDecl bool_param(std::string name, bool def) { return {std::move(name), {K::Bool}, def, {}}; }
ParamDecl choice_param(std::string name, std::string def, std::vector<std::string> choices) {
    return {std::move(name), {K::String}, std::move(def), std::move(choices)};
}

std::vector<ParamDecl> svm_space(Family f) {
    std::vector<ParamDecl> s{
        real_param("C", 1.0),
        real_param("tol", 1e-3),
        {"class_weight", {K::None, K::String}, NoneValue{}, {"balanced"}},
        {"random_state", {K::None, K::Int}, NoneValue{}, {}},
        int_param("max_iter", -1),
        bool_param("shrinking", true),
        bool_param("probability", false),
        real_param("cache_size", 200.0),
    };
    if (f == Family::SVMLinear) {
        s.push_back(choice_param("kernel", "linear", {"linear"}));
    } else {
        s.push_back({"gamma", {K::String, K::Real}, std::string("scale"), {"scale", "auto"}});
        if (f == Family::SVMSigmoid) {
            s.push_back(choice_param("kernel", "sigmoid", {"sigmoid"}));
            s.push_back(real_param("coef0", 0.0));
        } else {
            s.push_back(choice_param("kernel", "rbf", {"rbf"}));
        }
    }
    return s;
}

std::vector<ParamDecl> build_space(Family f) {
    switch (f) {
        case Family::GBT:
            return {int_param("max_depth", 6),         real_param("learning_rate", 0.3),
                    real_param("subsample", 1.0),      int_param("n_estimators", 100),
                    real_param("reg_lambda", 1.0),     real_param("min_child_weight", 1.0)};
        case Family::MLP:
            return {{"hidden_layer_sizes", {K::IntList}, std::vector<std::int64_t>{100}, {}},
                    choice_param("activation", "relu", {"relu", "tanh", "logistic"}),
                    choice_param("solver", "adam", {"adam", "sgd", "lbfgs"}),
                    int_param("max_iter", 200),
                    real_param("momentum", 0.9),
                    real_param("learning_rate_init", 1e-3),
                    real_param("alpha", 1e-4),
                    real_param("beta_1", 0.9),
                    real_param("beta_2", 0.999),
                    real_param("epsilon", 1e-8),
                    choice_param("loss", "squared_error", {"squared_error", "cross_entropy"})};
        case Family::GaussianNB:
            return {real_param("var_smoothing", 1e-9), {"priors", {K::None, K::RealList}, NoneValue{}, {}}};
        case Family::AdaBoost:
            return {int_param("n_estimators", 50), real_param("learning_rate", 1.0)};
        case Family::KNN:
            return {int_param("n_neighbors", 5),
                    choice_param("weights", "uniform", {"uniform", "distance"}),
                    choice_param("algorithm", "auto", {"auto", "ball_tree", "kd_tree", "brute"}),
                    int_param("leaf_size", 30),
                    int_param("p", 2),
                    choice_param("metric", "euclidean", {"euclidean", "manhattan", "minkowski"}),
                    int_param("n_jobs", -1)};
        case Family::RandomForest:
            return {int_param("n_estimators", 100),
                    {"max_depth", {K::None, K::Int}, NoneValue{}, {}},
                    int_param("min_samples_split", 2),
                    int_param("min_samples_leaf", 1),
                    {"max_features", {K::String, K::Int, K::Real, K::None}, std::string("sqrt"), {"sqrt", "auto", "log2"}},
                    bool_param("bootstrap", true),
                    choice_param("criterion", "gini", {"gini", "entropy"}),
                    bool_param("oob_score", false),
                    {"random_state", {K::None, K::Int}, NoneValue{}, {}}};
        case Family::SVMLinear:
        case Family::SVMSigmoid:
        case Family::SVMRbf:
            return svm_space(f);
    }
    return {};
}

const ParamDecl* find_decl(Family f, const std::string& name) {
    for (const auto& d : param_space(f)) {
        if (d.name == name) return &d;
    }
    return nullptr;
}

bool accepts(const ParamDecl& d, const HyperValue& v) {
    const ValueKind k = kind_of(v);
    for (ValueKind allowed : d.kinds) {
        if (allowed == k) return true;
        if (allowed == K::Real && k == K::Int) return true;
    }
    return false;
}

}  // namespace

const std::vector<ParamDecl>& param_space(Family f) {
    static const std::array<std::vector<ParamDecl>, kAllFamilies.size()> spaces = [] {
        std::array<std::vector<ParamDecl>, kAllFamilies.size()> out;
        for (Family fam : kAllFamilies) out[static_cast<std::size_t>(fam)] = build_space(fam);
        return out;
    }();
    return spaces[static_cast<std::size_t>(f)];
}

void validate_params(Family f, const HyperParams& p) {
    for (const auto& [name, value] : p) {
        const ParamDecl* d = find_decl(f, name);
        if (!d) {
            throw ConfigError(std::string(family_name(f)) + " has no hyperparameter '" + name + "'");
        }
        if (!accepts(*d, value)) {
            throw ConfigError(std::string(family_name(f)) + "." + name + " does not accept value " +
                              format_value(value));
        }
        if (kind_of(value) == K::String) {
            const auto& s = std::get<std::string>(value);
            if (std::find(d->choices.begin(), d->choices.end(), s) == d->choices.end()) {
                throw ConfigError(std::string(family_name(f)) + "." + name + " has no option '" + s + "'");
            }
        }
    }
}

ParamReader::ParamReader(Family f, const HyperParams& p) : family_(f), params_(p) {}

const HyperValue& ParamReader::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it != params_.end()) return it->second;
    const ParamDecl* d = find_decl(family_, name);
    if (!d) throw ConfigError(std::string(family_name(family_)) + " has no hyperparameter '" + name + "'");
    return d->default_value;
}

bool ParamReader::is_none(const std::string& name) const { return kind_of(get(name)) == K::None; }

namespace {
[[noreturn]] void wrong_kind(Family f, const std::string& name, const char* wanted) {
    throw ConfigError(std::string(family_name(f)) + "." + name + " is not " + wanted);
}
}  // namespace

bool ParamReader::get_bool(const std::string& name) const {
    const auto& v = get(name);
    if (auto* b = std::get_if<bool>(&v)) return *b;
    wrong_kind(family_, name, "a boolean");
}

std::int64_t ParamReader::get_int(const std::string& name) const {
    const auto& v = get(name);
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
    wrong_kind(family_, name, "an integer");
}

double ParamReader::get_real(const std::string& name) const {
    const auto& v = get(name);
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    wrong_kind(family_, name, "a number");
}

const std::string& ParamReader::get_string(const std::string& name) const {
    const auto& v = get(name);
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    wrong_kind(family_, name, "a string");
}

std::vector<std::int64_t> ParamReader::get_int_list(const std::string& name) const {
    const auto& v = get(name);
    if (auto* l = std::get_if<std::vector<std::int64_t>>(&v)) return *l;
    wrong_kind(family_, name, "an integer tuple");
}

std::vector<double> ParamReader::get_real_list(const std::string& name) const {
    const auto& v = get(name);
    if (auto* l = std::get_if<std::vector<double>>(&v)) return *l;
    wrong_kind(family_, name, "a list of numbers");
}

}  // namespace deepfuse
