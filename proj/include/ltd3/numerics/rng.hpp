#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ltd3 {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// A generator for one named concern (env, latent, exploration, ...) derived
/// from the master seed. Streams with different names are decorrelated, so
/// drawing from one never shifts another.
inline Rng make_stream(std::uint64_t master_seed, std::string_view name) {
  return Rng(splitmix64(master_seed ^ splitmix64(fnv1a64(name))));
}

/// Per-concern streams of a training run.
struct RngStreams {
  Rng init, env, latent, explore, batch, info_batch, target_noise, eval;

  explicit RngStreams(std::uint64_t seed)
      : init(make_stream(seed, "init")),
        env(make_stream(seed, "env")),
        latent(make_stream(seed, "latent")),
        explore(make_stream(seed, "explore")),
        batch(make_stream(seed, "batch")),
        info_batch(make_stream(seed, "info_batch")),
        target_noise(make_stream(seed, "target_noise")),
        eval(make_stream(seed, "eval")) {}
};

}  // namespace ltd3
