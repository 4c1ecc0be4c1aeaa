// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nrsim {

// Named substreams of one master seed.  Every randomized entity (machine
// placement, each UE's arrivals, each link's fading draw) owns its own
// stream so that adding or removing entities does not perturb the draws of
// the others.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic generator for substream (tag, id) of `master_seed`.
inline std::mt19937_64 make_stream(std::uint64_t master_seed, std::string_view tag,
                                   std::uint64_t id = 0) {
  std::uint64_t s = splitmix64(master_seed ^ fnv1a(tag));
  s = splitmix64(s ^ (0x5851f42d4c957f2dULL * (id + 1)));
  return std::mt19937_64(s);
}

struct Rng {
  std::mt19937_64 gen;

  explicit Rng(std::mt19937_64 g) : gen(std::move(g)) {}
  Rng(std::uint64_t master_seed, std::string_view tag, std::uint64_t id = 0)
      : gen(make_stream(master_seed, tag, id)) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  }
  double normal(double mean, double sigma) {
    return std::normal_distribution<double>(mean, sigma)(gen);
  }
  bool bernoulli(double p) {
    if (p >= 1.0) {
      uniform(0.0, 1.0);  // keep draw counts stable across p
      return true;
    }
    if (p <= 0.0) {
      uniform(0.0, 1.0);
      return false;
    }
    return uniform(0.0, 1.0) < p;
  }
};

}  // namespace nrsim
