#include "deepfuse/classifiers/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>

#include "deepfuse/error.hpp"

namespace deepfuse {

namespace {

constexpr char kMagic[8] = {'D', 'F', 'M', 'O', 'D', 'E', 'L', '\0'};
constexpr std::uint64_t kVersion = 1;
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 34;

}  // namespace

void BinaryWriter::u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out_.write(reinterpret_cast<const char*>(b), 8);
}
void BinaryWriter::i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
void BinaryWriter::str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void BinaryWriter::reals(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
}
void BinaryWriter::sizes(const std::vector<std::size_t>& v) {
    u64(v.size());
    for (std::size_t x : v) u64(x);
}
void BinaryWriter::ints(const std::vector<int>& v) {
    u64(v.size());
    for (int x : v) i64(x);
}

std::uint64_t BinaryReader::u64() {
    unsigned char b[8];
    in_.read(reinterpret_cast<char*>(b), 8);
    if (in_.gcount() != 8) throw FormatError("model blob truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}
std::int64_t BinaryReader::i64() { return static_cast<std::int64_t>(u64()); }
double BinaryReader::f64() { return std::bit_cast<double>(u64()); }
std::string BinaryReader::str() {
    const std::uint64_t n = u64();
    if (n > kMaxLength) throw FormatError("model blob string length out of range");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::uint64_t>(in_.gcount()) != n) throw FormatError("model blob truncated");
    return s;
}
std::vector<double> BinaryReader::reals() {
    const std::uint64_t n = u64();
    if (n > kMaxLength) throw FormatError("model blob array length out of range");
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
}
std::vector<std::size_t> BinaryReader::sizes() {
    const std::uint64_t n = u64();
    if (n > kMaxLength) throw FormatError("model blob array length out of range");
    std::vector<std::size_t> v(n);
    for (auto& x : v) x = u64();
    return v;
}
std::vector<int> BinaryReader::ints() {
    const std::uint64_t n = u64();
    if (n > kMaxLength) throw FormatError("model blob array length out of range");
    std::vector<int> v(n);
    for (auto& x : v) x = static_cast<int>(i64());
    return v;
}

FittedModel::FittedModel(ClassifierSpec spec, int class_count, std::size_t feature_count)
    : spec_(std::move(spec)), class_count_(class_count), feature_count_(feature_count) {}

void FittedModel::check_features(const FeatureMatrix& x) const {
    if (x.cols() != feature_count_) {
        throw ShapeError(std::string(family_name(family())) + " model was fit on " + std::to_string(feature_count_) +
                         " features, got " + std::to_string(x.cols()));
    }
}

FeatureMatrix FittedModel::predict_proba(const FeatureMatrix& x) const {
    check_features(x);
    return FeatureMatrix(x.rows(), static_cast<std::size_t>(class_count_), proba_rows(x));
}

std::vector<int> FittedModel::predict(const FeatureMatrix& x) const {
    check_features(x);
    const auto k = static_cast<std::size_t>(class_count_);
    const std::vector<double> p = proba_rows(x);
    std::vector<int> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto first = p.begin() + static_cast<std::ptrdiff_t>(r * k);
        out[r] = static_cast<int>(std::max_element(first, first + static_cast<std::ptrdiff_t>(k)) - first);
    }
    return out;
}

namespace {

void write_value(BinaryWriter& w, const HyperValue& v) {
    w.u64(v.index());
    switch (kind_of(v)) {
        case ValueKind::None: break;
        case ValueKind::Bool: w.u64(std::get<bool>(v) ? 1 : 0); break;
        case ValueKind::Int: w.i64(std::get<std::int64_t>(v)); break;
        case ValueKind::Real: w.f64(std::get<double>(v)); break;
        case ValueKind::String: w.str(std::get<std::string>(v)); break;
        case ValueKind::IntList: {
            const auto& l = std::get<std::vector<std::int64_t>>(v);
            w.u64(l.size());
            for (auto x : l) w.i64(x);
            break;
        }
        case ValueKind::RealList: w.reals(std::get<std::vector<double>>(v)); break;
    }
}

HyperValue read_value(BinaryReader& r) {
    switch (static_cast<ValueKind>(r.u64())) {
        case ValueKind::None: return NoneValue{};
        case ValueKind::Bool: return r.u64() != 0;
        case ValueKind::Int: return r.i64();
        case ValueKind::Real: return r.f64();
        case ValueKind::String: return r.str();
        case ValueKind::IntList: {
            const std::uint64_t n = r.u64();
            if (n > kMaxLength) throw FormatError("model blob array length out of range");
            std::vector<std::int64_t> l(n);
            for (auto& x : l) x = r.i64();
            return l;
        }
        case ValueKind::RealList: return r.reals();
    }
    throw FormatError("unknown hyperparameter value tag in model blob");
}

}  // namespace

void FittedModel::save(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    BinaryWriter w(out);
    w.u64(kVersion);
    w.str(std::string(family_name(family())));
    w.u64(spec_.seed);
    w.u64(spec_.hyperparams.size());
    for (const auto& [name, value] : spec_.hyperparams) {
        w.str(name);
        write_value(w, value);
    }
    w.i64(class_count_);
    w.u64(feature_count_);
    write_body(w);
    if (!out) throw FormatError("failed writing model blob");
}

// Per-family readers, defined next to each family.
ModelPtr read_svm(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d);
ModelPtr read_mlp(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d);
ModelPtr read_gnb(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d);
ModelPtr read_knn(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d);
ModelPtr read_forest(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d);
ModelPtr read_adaboost(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d);
ModelPtr read_gbt(BinaryReader& r, ClassifierSpec spec, int k, std::size_t d);

ModelPtr load_model(std::istream& in) {
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (in.gcount() != sizeof magic || !std::equal(magic, magic + sizeof magic, kMagic)) {
        throw FormatError("not a model blob");
    }
    BinaryReader r(in);
    const std::uint64_t version = r.u64();
    if (version != kVersion) throw FormatError("unsupported model blob version " + std::to_string(version));
    ClassifierSpec spec;
    spec.family = parse_family(r.str());
    spec.seed = r.u64();
    const std::uint64_t n = r.u64();
    if (n > 1024) throw FormatError("model blob hyperparameter count out of range");
    for (std::uint64_t i = 0; i < n; ++i) {
        std::string name = r.str();
        spec.hyperparams[name] = read_value(r);
    }
    const int k = static_cast<int>(r.i64());
    const std::size_t d = r.u64();
    if (k < 2 || d == 0) throw FormatError("model blob has invalid shape");
    switch (spec.family) {
        case Family::SVMLinear:
        case Family::SVMSigmoid:
        case Family::SVMRbf: return read_svm(r, std::move(spec), k, d);
        case Family::MLP: return read_mlp(r, std::move(spec), k, d);
        case Family::GaussianNB: return read_gnb(r, std::move(spec), k, d);
        case Family::KNN: return read_knn(r, std::move(spec), k, d);
        case Family::RandomForest: return read_forest(r, std::move(spec), k, d);
        case Family::AdaBoost: return read_adaboost(r, std::move(spec), k, d);
        case Family::GBT: return read_gbt(r, std::move(spec), k, d);
    }
    throw FormatError("unknown family in model blob");
}

double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
    if (truth.size() != predicted.size() || truth.empty()) {
        throw ShapeError("accuracy needs equal-length nonempty label vectors");
    }
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == predicted[i];
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

void softmax_inplace(std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    double total = 0.0;
    for (double& x : v) {
        x = std::exp(x - m);
        total += x;
    }
    for (double& x : v) x /= total;
}

}  // namespace deepfuse
