#include "irmx/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace irmx {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64_mix(seed ^ splitmix64_mix(stream + kGolden));
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::uint64_t x = derive_seed(seed, stream);
    for (auto& word : s_) {
        x += kGolden;
        word = splitmix64_mix(x);
    }
    // SplitMix64 output is a bijection of a counter, so four consecutive
    // outputs cannot all be zero.
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::standard_normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
    const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    return static_cast<std::uint64_t>(m >> 64);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(seed, stream); }

double sample_normal(Rng& rng, double mean, double std) {
    if (!(std >= 0.0)) throw std::invalid_argument("sample_normal: std must be nonnegative");
    const double z = rng.standard_normal();
    return mean + std * z;
}

}  // namespace irmx
