#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "ltd3/errors.hpp"
#include "ltd3/numerics/matrix.hpp"
#include "ltd3/numerics/rng.hpp"

namespace ltd3 {

/// Latent z = [z_cont, z_disc] with a uniform prior on [-1,1]^cont_dim times
/// a uniform categorical over disc_k classes (disc_k == 0: no discrete part).
struct LatentSpec {
  std::size_t cont_dim = 2;
  std::size_t disc_k = 0;

  void validate() const {
    if (cont_dim + (disc_k > 0 ? 1 : 0) < 1)
      throw ConfigError("latent: need at least one continuous dimension or a discrete part",
                        "latent_cont_dim");
    if (disc_k == 1) throw ConfigError("latent: disc_k must be 0 or >= 2", "latent_disc_k");
  }

  bool has_disc() const { return disc_k > 0; }

  /// Width of the network-facing encoding: z_cont followed by one-hot(z_disc).
  std::size_t encoded_dim() const { return cont_dim + disc_k; }

  /// Posterior head width: mean and log-std per continuous dim, then logits.
  std::size_t posterior_dim() const { return 2 * cont_dim + disc_k; }

  /// H(z) in nats; differential entropy for the box part.
  double prior_entropy() const {
    return static_cast<double>(cont_dim) * std::numbers::ln2 +
           (disc_k > 0 ? std::log(static_cast<double>(disc_k)) : 0.0);
  }
};

struct Latent {
  std::vector<double> cont;
  std::optional<std::size_t> disc;
};

/// Draw z ~ p(z). The caller holds it fixed for a whole episode.
inline Latent sample_latent(const LatentSpec& spec, Rng& rng) {
  Latent z;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  z.cont.resize(spec.cont_dim);
  for (double& c : z.cont) c = u(rng);
  if (spec.has_disc()) {
    std::uniform_int_distribution<std::size_t> k(0, spec.disc_k - 1);
    z.disc = k(rng);
  }
  return z;
}

inline Matrix encode_latents(const LatentSpec& spec, const Matrix& z_cont,
                             const std::vector<std::size_t>& z_disc) {
  const Eigen::Index n = z_cont.rows();
  Matrix out = Matrix::Zero(n, static_cast<Eigen::Index>(spec.encoded_dim()));
  if (spec.cont_dim > 0) out.leftCols(static_cast<Eigen::Index>(spec.cont_dim)) = z_cont;
  if (spec.has_disc()) {
    if (static_cast<Eigen::Index>(z_disc.size()) != n)
      throw DimensionError("encode_latents: discrete labels do not match batch size");
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::size_t k = z_disc[static_cast<std::size_t>(i)];
      if (k >= spec.disc_k) throw BoundsError("encode_latents: class index out of range");
      out(i, static_cast<Eigen::Index>(spec.cont_dim + k)) = 1.0;
    }
  }
  return out;
}

inline Matrix encode_latent(const LatentSpec& spec, const Latent& z) {
  if (z.cont.size() != spec.cont_dim || z.disc.has_value() != spec.has_disc())
    throw DimensionError("encode_latent: latent does not match spec");
  std::vector<std::size_t> d;
  if (z.disc) d.push_back(*z.disc);
  Matrix c = spec.cont_dim > 0 ? row_from(z.cont) : Matrix(1, 0);
  return encode_latents(spec, c, d);
}

}  // namespace ltd3
