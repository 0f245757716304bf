#pragma once

#include <span>

namespace deepfuse {

enum class KernelKind { Linear, Sigmoid, Rbf };

/// linear <x,z>; sigmoid tanh(gamma <x,z> + coef0); rbf exp(-gamma |x-z|^2).
/// ShapeError on a dimension mismatch.
double kernel_eval(KernelKind kind, std::span<const double> x, std::span<const double> z, double gamma,
                   double coef0);

struct Kernel {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 1.0;
    double coef0 = 0.0;

    double operator()(std::span<const double> x, std::span<const double> z) const {
        return kernel_eval(kind, x, z, gamma, coef0);
    }
};

}  // namespace deepfuse
