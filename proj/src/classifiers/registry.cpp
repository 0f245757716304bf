#include "deepfuse/classifiers/adaboost.hpp"
#include "deepfuse/classifiers/forest.hpp"
#include "deepfuse/classifiers/gbt.hpp"
#include "deepfuse/classifiers/knn.hpp"
#include "deepfuse/classifiers/mlp.hpp"
#include "deepfuse/classifiers/naive_bayes.hpp"
#include "deepfuse/classifiers/svm.hpp"
#include "deepfuse/error.hpp"

namespace deepfuse {

ModelPtr fit(const LabeledDataset& train, const ClassifierSpec& spec) {
    validate_params(spec.family, spec.hyperparams);
    if (train.class_count() < 2) {
        throw FitError(std::string(family_name(spec.family)) + " needs at least two classes");
    }
    switch (spec.family) {
        case Family::GBT: return fit_gbt(train, spec);
        case Family::MLP: return fit_mlp(train, spec);
        case Family::GaussianNB: return fit_gnb(train, spec);
        case Family::AdaBoost: return fit_adaboost(train, spec);
        case Family::KNN: return fit_knn(train, spec);
        case Family::RandomForest: return fit_forest(train, spec);
        case Family::SVMLinear:
        case Family::SVMSigmoid:
        case Family::SVMRbf: return fit_svm(train, spec);
    }
    throw ConfigError("unknown classifier family");
}

}  // namespace deepfuse
