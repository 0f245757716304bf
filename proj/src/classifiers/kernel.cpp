#include "deepfuse/classifiers/kernel.hpp"

#include <cmath>
#include <string>

#include "deepfuse/error.hpp"

namespace deepfuse {

double kernel_eval(KernelKind kind, std::span<const double> x, std::span<const double> z, double gamma,
                   double coef0) {
    if (x.size() != z.size()) {
        throw ShapeError("kernel arguments have " + std::to_string(x.size()) + " and " + std::to_string(z.size()) +
                         " entries");
    }
    if (kind == KernelKind::Rbf) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - z[i];
            s += d * d;
        }
        return std::exp(-gamma * s);
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * z[i];
    return kind == KernelKind::Linear ? dot : std::tanh(gamma * dot + coef0);
}

}  // namespace deepfuse
