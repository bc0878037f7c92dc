#pragma once

// Seeded random streams. Every stream is a std::mt19937_64 whose seed is a
// SplitMix64 hash of (seed, run id, stream tag), so independent parts of a
// run (initial point, warm start, each epoch) never share state and a run is
// reproducible from its (seed, run id) pair alone.

#include <cstdint>
#include <random>
#include <string_view>

#include "ssvrg/linalg.hpp"

namespace ssvrg {

using Rng = std::mt19937_64;

inline constexpr std::string_view kRngFamily = "mt19937_64/splitmix64";

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream tags below 2^32 are epoch indices; the named tags sit above.
enum class StreamTag : std::uint64_t {
  InitialPoint = 0xFFFF0001ULL,
  WarmStart = 0xFFFF0002ULL,
  OutputSelection = 0xFFFF0003ULL,
  SgdIndex = 0xFFFF0004ULL,
  SigmaProbe = 0xFFFF0005ULL,
  Data = 0xFFFF0006ULL,
  Omega = 0xFFFF0007ULL,
};

inline Rng make_stream(std::uint64_t seed, std::uint64_t run_id, std::uint64_t tag) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ run_id);
  h = splitmix64(h ^ tag);
  return Rng(h);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t run_id, StreamTag tag) {
  return make_stream(seed, run_id, static_cast<std::uint64_t>(tag));
}

inline Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(rows, cols);
  // Column-major fill, one column after another.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) G(i, j) = normal(rng);
  return G;
}

}  // namespace ssvrg
