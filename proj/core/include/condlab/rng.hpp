#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace condlab {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: draw n of stream `key` is mix64(key + n * golden).
/// Streams are addressed by (seed, stream id), so any record can be regenerated
/// without replaying the ones before it. Distributions are implemented here rather
/// than taken from <random>, whose distribution algorithms differ between
/// standard libraries.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    /// Stream for (seed, id). Distinct ids give statistically independent streams.
    static CounterRng stream(std::uint64_t seed, std::uint64_t id) noexcept {
        return CounterRng(mix64(mix64(seed + 0x632be59bd9b4e019ULL) ^ (id * 0x9e3779b97f4a7c15ULL + 1)));
    }
    /// Child stream, for splitting one record's stream into independent parts.
    CounterRng split(std::uint64_t id) const noexcept { return stream(key_, id); }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Exponential(1).
    double exponential() noexcept;
    /// Standard normal (Box-Muller, one value per two draws).
    double normal() noexcept;
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, CounterRng& rng);

} // namespace condlab
