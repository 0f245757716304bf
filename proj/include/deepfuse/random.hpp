#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace deepfuse {

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Child seed for work item `index` of a run seeded with `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Deterministic random source. All conversions from raw 64-bit draws are
/// done here rather than through <random> distributions, whose output is
/// implementation-defined; results are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform();

    /// Uniform integer in [0, n). Requires n > 0.
    std::size_t below(std::size_t n);

    /// Standard normal (Box-Muller, no cached second value).
    double normal();

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& items) { shuffle(std::span<T>(items)); }

    /// `count` distinct indices from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

private:
    std::mt19937_64 engine_;
};

}  // namespace deepfuse
