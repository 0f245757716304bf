#include "deepfuse/synthetic.hpp"

#include <cmath>

#include "deepfuse/error.hpp"
#include "deepfuse/feature_io.hpp"
#include "deepfuse/random.hpp"

namespace deepfuse {

double separation_for_accuracy(double accuracy) {
    if (!(accuracy > 0.5 && accuracy < 1.0)) throw ConfigError("Bayes accuracy must lie in (0.5, 1)");
    // Bisection on Phi(mu) = 0.5 erfc(-mu / sqrt 2).
    double lo = 0.0;
    double hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < accuracy) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<SyntheticExtractor> default_synthetic_extractors() {
    return {{"alphanet", 0.98, 8}, {"betanet", 0.90, 8}, {"gammanet", 0.60, 8}};
}

std::vector<LabeledDataset> make_synthetic_sets(const std::vector<SyntheticExtractor>& extractors, std::size_t rows,
                                                std::uint64_t seed) {
    if (rows < 4) throw ConfigError("synthetic data needs at least 4 rows");
    std::vector<int> labels(rows);
    for (std::size_t i = 0; i < rows; ++i) labels[i] = i < rows / 2 ? 0 : 1;
    Rng label_rng(derive_seed(seed, 0));
    label_rng.shuffle(labels);

    std::vector<LabeledDataset> out;
    for (std::size_t e = 0; e < extractors.size(); ++e) {
        const auto& ex = extractors[e];
        if (ex.dims == 0) throw ConfigError("synthetic extractor needs at least one dimension");
        // Spread the separation evenly over all dimensions.
        const double shift = separation_for_accuracy(ex.bayes_accuracy) / std::sqrt(static_cast<double>(ex.dims));
        Rng rng(derive_seed(seed, e + 1));
        std::vector<double> values(rows * ex.dims);
        for (std::size_t i = 0; i < rows; ++i) {
            const double sign = labels[i] == 1 ? 1.0 : -1.0;
            for (std::size_t j = 0; j < ex.dims; ++j) values[i * ex.dims + j] = sign * shift + rng.normal();
        }
        out.emplace_back(FeatureMatrix(rows, ex.dims, std::move(values)), labels, 2, ex.id);
    }
    return out;
}

void write_synthetic_fixture(const std::filesystem::path& dir, const std::vector<LabeledDataset>& sets) {
    std::filesystem::create_directories(dir);
    for (const auto& s : sets) save_feature_set(dir / (s.source_tag() + ".fset"), s);
}

}  // namespace deepfuse
