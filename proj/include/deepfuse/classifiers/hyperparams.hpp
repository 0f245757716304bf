#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace deepfuse {

enum class Family { GBT, MLP, GaussianNB, AdaBoost, KNN, RandomForest, SVMLinear, SVMSigmoid, SVMRbf };

inline constexpr std::array<Family, 9> kAllFamilies{
    Family::GBT, Family::MLP,          Family::GaussianNB, Family::AdaBoost,  Family::KNN,
    Family::RandomForest, Family::SVMLinear, Family::SVMSigmoid, Family::SVMRbf,
};

/// Canonical name: GBT, MLP, GaussianNB, AdaBoost, KNN, RandomForest,
/// SVM_linear, SVM_sigmoid, SVM_RBF.
std::string_view family_name(Family f);

/// Column name used in result tables (XGBoost, Adaboost, RFClassifier, ...).
std::string_view table_name(Family f);

/// Accepts either naming, case-sensitive. ConfigError on anything else.
Family parse_family(std::string_view name);

struct NoneValue {
    friend bool operator==(NoneValue, NoneValue) { return true; }
};

using HyperValue = std::variant<NoneValue, bool, std::int64_t, double, std::string, std::vector<std::int64_t>,
                                std::vector<double>>;

enum class ValueKind { None, Bool, Int, Real, String, IntList, RealList };

ValueKind kind_of(const HyperValue& v);

/// None, True/False, integers, shortest round-trip reals (always with a '.'
/// or exponent), tuples "(100,22)" / "(50,)" for int lists, "[0.3,0.7]" for
/// real lists, anything else verbatim.
std::string format_value(const HyperValue& v);
HyperValue parse_value(std::string_view text);

using HyperParams = std::map<std::string, HyperValue>;

std::string format_params(const HyperParams& p);  // "a=1;b=None"

struct ParamDecl {
    std::string name;
    std::vector<ValueKind> kinds;      // accepted kinds; Int is also accepted where Real is
    HyperValue default_value;
    std::vector<std::string> choices;  // allowed strings, when String is accepted
};

/// The declared hyperparameter space of a family. Some names (n_jobs,
/// algorithm, leaf_size, cache_size, shrinking, probability) are accepted
/// for completeness and have no effect on results.
const std::vector<ParamDecl>& param_space(Family f);

/// ConfigError on unknown names, wrong kinds, or strings outside `choices`.
void validate_params(Family f, const HyperParams& p);

struct ClassifierSpec {
    Family family = Family::GaussianNB;
    HyperParams hyperparams;
    std::uint64_t seed = 0;
};

/// Typed lookup with the declared default filled in.
class ParamReader {
public:
    ParamReader(Family f, const HyperParams& p);

    const HyperValue& get(const std::string& name) const;
    bool is_none(const std::string& name) const;
    bool get_bool(const std::string& name) const;
    std::int64_t get_int(const std::string& name) const;
    double get_real(const std::string& name) const;  // ints widen
    const std::string& get_string(const std::string& name) const;
    std::vector<std::int64_t> get_int_list(const std::string& name) const;
    std::vector<double> get_real_list(const std::string& name) const;

private:
    Family family_;
    const HyperParams& params_;
};

}  // namespace deepfuse
