#pragma once

#include <cstdint>

namespace snnattack {

// Counter-based deterministic generator. Each draw hashes
// (seed, stream, counter) with a splitmix-style finalizer, so a given
// (seed, stream) pair yields the same sequence on every platform and a
// generator can be re-created mid-campaign without replaying draws.
// Streams are cheap: derive one per (attack run, iteration, purpose).
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), base_(mix(seed + kGamma * (stream + 1))) {}

    std::uint64_t next_u64() { return mix(base_ + kGamma * (++counter_)); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool bernoulli(double p) { return next_double() < p; }

    // Integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Independent generator for a derived purpose; never collides with
    // sequential draws from this one.
    Rng fork(std::uint64_t substream) const {
        return Rng(seed_, mix(stream_ + kGamma * (substream + 1)));
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

  private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

} // namespace snnattack
