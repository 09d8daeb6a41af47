#pragma once

#include <array>
#include <cstdint>

namespace irmx {

/// SplitMix64 finalizer (Steele, Lea & Flood). Bijective 64-bit mix.
std::uint64_t splitmix64_mix(std::uint64_t z);

/// Seed for stream `stream` under base seed `seed`:
///   derive_seed(seed, stream) = splitmix64_mix(seed ^ splitmix64_mix(stream + 0x9e3779b97f4a7c15))
/// Fixed forever; golden tests depend on it.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// xoshiro256** 1.0 generator with deterministic seeding.
///
/// The 256-bit state is filled by running a SplitMix64 sequence starting at
/// derive_seed(seed, stream). Every output is defined by integer arithmetic
/// only, so the raw and uniform streams are identical on any platform.
/// Normals use the basic Box-Muller transform (one variate per two uniforms,
/// no caching), which keeps the draw count per call fixed.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();

    /// Standard normal: sqrt(-2 ln(1-u1)) * cos(2 pi u2).
    double standard_normal();

    /// Bernoulli(p) via uniform() < p. Consumes exactly one uniform.
    bool bernoulli(double p);

    /// Uniform integer on [0, bound) via Lemire's multiply-shift (bias < 2^-64 * bound).
    std::uint64_t below(std::uint64_t bound);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    std::array<std::uint64_t, 4> s_{};
    std::uint64_t seed_;
    std::uint64_t stream_;
};

Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// Returns mean + std * z, z ~ N(0,1). Throws std::invalid_argument for std < 0.
double sample_normal(Rng& rng, double mean, double std);

}  // namespace irmx
