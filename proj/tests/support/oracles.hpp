#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's numerical routines.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "deepfuse/dataset.hpp"
#include "deepfuse/hpo.hpp"
#include "deepfuse/imgprep.hpp"
#include "deepfuse/classifiers/adaboost.hpp"
#include "deepfuse/classifiers/svm.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Cyclic Jacobi rotations on a symmetric matrix. Eigenvalues sorted
/// descending; vectors[i] pairs with values[i].
struct Eigen {
    std::vector<double> values;
    Matrix vectors;
};
Eigen jacobi_eigen(Matrix a);

/// Sample covariance (n-1) of row-major data.
Matrix covariance(const deepfuse::FeatureMatrix& x);

/// Two isotropic Gaussian blobs per class centre, one centre per class.
deepfuse::LabeledDataset blobs(std::size_t n, const std::vector<std::vector<double>>& centres, double spread,
                               std::uint64_t seed);

/// Uniform [-1, 1) matrix from a private linear congruential stream.
deepfuse::FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Small private generator so oracles never share the library's RNG.
class Lcg {
public:
    explicit Lcg(std::uint64_t seed) : state_(seed * 2862933555777941757ULL + 3037000493ULL) {}
    std::uint64_t next() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return state_ >> 11;
    }
    double uniform() { return static_cast<double>(next() >> 11) / 4503599627370496.0; }  // [0,1)
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
    double normal();

private:
    std::uint64_t state_;
};

/// Exhaustive k-nearest scan: every distance computed, then sorted by
/// (distance, index).
std::vector<std::size_t> brute_neighbors(const deepfuse::FeatureMatrix& train, std::span<const double> query,
                                         std::size_t k, const std::string& metric, double p);

/// Component labeling by breadth-first flood fill; returns, for the largest
/// 4-connected component (raster-first on ties), its inclusive bounds.
deepfuse::imgprep::CropBounds largest_component_bounds(const deepfuse::imgprep::Mask& mask, std::size_t h,
                                                       std::size_t w);

/// Max violation of the soft-margin KKT conditions:
/// alpha = 0 -> y f >= 1, 0 < alpha < C -> y f = 1, alpha = C -> y f <= 1.
double kkt_residual(const deepfuse::FeatureMatrix& x, std::span<const int> y, std::span<const double> upper,
                    const deepfuse::Kernel& k, const deepfuse::SmoSolution& s);

/// Weighted error of a stump under normalized weights, summed in index order.
double weighted_error(const deepfuse::DecisionTree& stump, const deepfuse::FeatureMatrix& x,
                      const std::vector<int>& y, const std::vector<double>& weights);

/// Fold partition written from its description: shuffle each class with the
/// library RNG, deal round-robin carrying the position across classes.
std::vector<std::size_t> fold_assignment(const std::vector<int>& labels, int k, std::size_t folds,
                                         std::uint64_t seed);

/// Exhaustive CV over nested loops of an explicit config list. Returns the
/// index of the winner (mean desc, std asc, first).
struct CvScore {
    double mean;
    double std;
};
std::size_t exhaustive_cv_winner(const deepfuse::LabeledDataset& train, deepfuse::Family family,
                                 const std::vector<deepfuse::HyperParams>& configs, std::size_t folds,
                                 std::uint64_t seed, std::vector<CvScore>* scores = nullptr);

/// Majority vote by explicit counting; ties by mean probability, then the
/// earliest member's prediction.
int count_vote(const std::vector<int>& member_preds, const std::vector<std::vector<double>>& member_proba);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

std::filesystem::path fixture(const std::string& name);

}  // namespace oracle
