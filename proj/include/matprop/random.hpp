#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace matprop {

/// Philox4x32-10 block function: counter-based, so (key, counter) fully
/// determines the output on every platform.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Independent child seed for (seed, id); used for per-trial seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t id) noexcept;

/// Random stream keyed by (seed, stream id). Distributions are implemented
/// here rather than taken from <random> because the standard distributions
/// are not reproducible across standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept { return next_u64(); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    /// Child stream with the same seed and a different stream id.
    Rng substream(std::uint64_t id) const noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform integer in [0, bound); bound > 0.
    std::uint64_t uniform_below(std::uint64_t bound) noexcept;
    bool bernoulli(double p) noexcept;
    /// Standard normal via Box-Muller.
    double normal() noexcept;
    /// +1 or -1 with equal probability.
    double sign() noexcept;

    /// k distinct values from [0, n) in random order (uniform without replacement).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);
    /// Uniformly random permutation of [0, n).
    std::vector<std::size_t> permutation(std::size_t n);

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace matprop
