#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace fvlab {

/// Engine used by every sampler in the library.
using Engine = std::mt19937_64;

/// SplitMix64 finalizer; mixes a 64-bit word into a well-distributed one.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic, independent stream for one replica. Streams depend only on
/// (seed, replica, salt), never on how replicas are scheduled on workers.
Engine make_stream(std::uint64_t seed, std::uint64_t replica, std::uint64_t salt = 0);

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1], safe for logarithms.
inline double uniform_open0(Engine& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

/// Uniform integer in [0, n).
std::uint64_t uniform_index(Engine& rng, std::uint64_t n);

/// Exponential variate with the given rate (rate > 0).
inline double exponential(Engine& rng, double rate) {
  return -std::log(uniform_open0(rng)) / rate;
}

}  // namespace fvlab
