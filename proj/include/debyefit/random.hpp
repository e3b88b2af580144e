#pragma once

#include <cstddef>
#include <cstdint>

namespace debyefit {

/// Counter-based generator: output n is a SplitMix64 finalizer applied to
/// (key, n). Streams are split by deriving a fresh key, so a run owns its
/// stream and the sequence depends only on the seed.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept;

    /// Independent child stream; advances this stream by one draw.
    CounterRng split() noexcept;

    /// Uniform in [0, 1).
    double uniform() noexcept;
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) noexcept;
    /// Uniform integer in [0, n). n must be > 0.
    std::size_t below(std::size_t n) noexcept;
    /// Standard normal (Box-Muller, no caching so the stream stays positional).
    double normal() noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace debyefit
