#include "chasm/rng.hpp"

namespace chasm {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), engine_(splitmix64(seed ^ splitmix64(stream + 0x5851f42d4c957f2dULL)))
{
}

std::uint64_t Rng::below(std::uint64_t n)
{
    // rejection on the top of the range keeps the draw unbiased
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

}  // namespace chasm
