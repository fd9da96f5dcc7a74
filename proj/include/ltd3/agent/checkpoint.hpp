#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "ltd3/agent/learner.hpp"

namespace ltd3 {

// Layout (all integers and floats little-endian):
//   "LTD3CKPT" u32 version u64 config_hash u64 step
//   u32 n_networks, per network: u32 name_len, name, u32 n_tensors,
//       per tensor: u64 rows, u64 cols, rows*cols f64 (row-major)
//   u32 n_optimizers, per optimizer: u32 name_len, name, u64 t,
//       f64 lr, beta1, beta2, eps, u32 n_tensors, tensors m..., tensors v...
inline constexpr char kCheckpointMagic[8] = {'L', 'T', 'D', '3', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <class U>
void put_le(std::ostream& os, U v) {
  unsigned char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <class U>
U get_le(std::istream& is) {
  unsigned char b[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(U))) throw InputError("checkpoint: truncated file");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ostream& os, double d) { put_le(os, std::bit_cast<std::uint64_t>(d)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

inline void put_name(std::ostream& os, const std::string& s) {
  put_le(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_name(std::istream& is) {
  const auto n = get_le<std::uint32_t>(is);
  if (n > 4096) throw InputError("checkpoint: corrupt name length");
  std::string s(n, '\0');
  if (!is.read(s.data(), n)) throw InputError("checkpoint: truncated file");
  return s;
}

inline void put_tensor(std::ostream& os, const Matrix& m) {
  put_le(os, static_cast<std::uint64_t>(m.rows()));
  put_le(os, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index k = 0; k < m.size(); ++k) put_f64(os, m.data()[k]);
}

inline void get_tensor(std::istream& is, Matrix& m, const std::string& where) {
  const auto r = get_le<std::uint64_t>(is);
  const auto c = get_le<std::uint64_t>(is);
  if (r != static_cast<std::uint64_t>(m.rows()) || c != static_cast<std::uint64_t>(m.cols()))
    throw InputError("checkpoint: shape mismatch in " + where);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = get_f64(is);
}

struct NamedTensors {
  std::string name;
  std::vector<Matrix*> tensors;
};

struct NamedOptimizer {
  std::string name;
  AdamState* state;
};

inline std::vector<NamedTensors> checkpoint_networks(AgentNets& n) {
  return {{"actor", n.actor.tensors()},
          {"critic1", n.critic1.tensors()},
          {"critic2", n.critic2.tensors()},
          {"actor_target", n.actor_target.tensors()},
          {"critic1_target", n.critic1_target.tensors()},
          {"critic2_target", n.critic2_target.tensors()},
          {"posterior", n.posterior.tensors()}};
}

inline std::vector<NamedOptimizer> checkpoint_optimizers(Learner& l) {
  return {{"actor", &l.actor_opt()},
          {"critic1", &l.critic1_opt()},
          {"critic2", &l.critic2_opt()},
          {"posterior", &l.posterior_opt()}};
}

}  // namespace detail

struct CheckpointHeader {
  std::uint32_t version = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t step = 0;
};

inline void save_checkpoint(std::ostream& os, Learner& learner, std::uint64_t config_hash) {
  using namespace detail;
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le(os, kCheckpointVersion);
  put_le(os, config_hash);
  put_le(os, static_cast<std::uint64_t>(learner.step()));
  const auto nets = checkpoint_networks(learner.nets());
  put_le(os, static_cast<std::uint32_t>(nets.size()));
  for (const auto& n : nets) {
    put_name(os, n.name);
    put_le(os, static_cast<std::uint32_t>(n.tensors.size()));
    for (const Matrix* t : n.tensors) put_tensor(os, *t);
  }
  const auto opts = checkpoint_optimizers(learner);
  put_le(os, static_cast<std::uint32_t>(opts.size()));
  for (const auto& o : opts) {
    put_name(os, o.name);
    put_le(os, static_cast<std::uint64_t>(o.state->t));
    put_f64(os, o.state->config.lr);
    put_f64(os, o.state->config.beta1);
    put_f64(os, o.state->config.beta2);
    put_f64(os, o.state->config.eps);
    put_le(os, static_cast<std::uint32_t>(o.state->m.size()));
    for (const Matrix& m : o.state->m) put_tensor(os, m);
    for (const Matrix& v : o.state->v) put_tensor(os, v);
  }
  if (!os) throw std::runtime_error("checkpoint: write failed");
}

/// Loads into a learner built from the same configuration. A header whose
/// config hash differs from `expected_hash` is rejected unless `force`.
inline CheckpointHeader load_checkpoint(std::istream& is, Learner& learner,
                                        std::uint64_t expected_hash, bool force = false) {
  using namespace detail;
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw InputError("checkpoint: bad magic");
  CheckpointHeader h;
  h.version = get_le<std::uint32_t>(is);
  if (h.version != kCheckpointVersion)
    throw InputError("checkpoint: unsupported version " + std::to_string(h.version));
  h.config_hash = get_le<std::uint64_t>(is);
  h.step = get_le<std::uint64_t>(is);
  if (h.config_hash != expected_hash && !force)
    throw ConfigError("checkpoint: config hash mismatch (file " + std::to_string(h.config_hash) +
                      ", expected " + std::to_string(expected_hash) + ")");
  auto nets = checkpoint_networks(learner.nets());
  if (get_le<std::uint32_t>(is) != nets.size()) throw InputError("checkpoint: network count mismatch");
  for (auto& n : nets) {
    if (get_name(is) != n.name) throw InputError("checkpoint: expected network " + n.name);
    if (get_le<std::uint32_t>(is) != n.tensors.size())
      throw InputError("checkpoint: layer count mismatch in " + n.name);
    for (Matrix* t : n.tensors) get_tensor(is, *t, n.name);
  }
  auto opts = checkpoint_optimizers(learner);
  if (get_le<std::uint32_t>(is) != opts.size()) throw InputError("checkpoint: optimizer count mismatch");
  for (auto& o : opts) {
    if (get_name(is) != o.name) throw InputError("checkpoint: expected optimizer " + o.name);
    o.state->t = get_le<std::uint64_t>(is);
    o.state->config.lr = get_f64(is);
    o.state->config.beta1 = get_f64(is);
    o.state->config.beta2 = get_f64(is);
    o.state->config.eps = get_f64(is);
    if (get_le<std::uint32_t>(is) != o.state->m.size())
      throw InputError("checkpoint: optimizer tensor count mismatch in " + o.name);
    for (Matrix& m : o.state->m) get_tensor(is, m, o.name);
    for (Matrix& v : o.state->v) get_tensor(is, v, o.name);
  }
  learner.set_step(static_cast<std::size_t>(h.step));
  return h;
}

}  // namespace ltd3
