#include "deepfuse/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace deepfuse {

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix_seed(mix_seed(master) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::below(std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("Rng::below requires n > 0");
    }
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
        draw = engine_();
    } while (draw >= limit);
    return static_cast<std::size_t>(draw % bound);
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t count) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    count = std::min(count, n);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + below(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace deepfuse
