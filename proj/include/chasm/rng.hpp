#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace chasm {

/// Seedable generator with independent streams. The engine is mt19937_64
/// keyed by splitmix64(seed, stream); all draws go through the helpers
/// below so that sequences are identical across standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    static constexpr std::string_view algorithm = "mt19937_64+splitmix64";

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }

    /// Generator for a child stream, e.g. one per replica.
    Rng split(std::uint64_t stream) const { return Rng(seed_, stream); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace chasm
