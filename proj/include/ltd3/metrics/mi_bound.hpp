#pragma once

#include "ltd3/agent/losses.hpp"

namespace ltd3 {

/// Variational lower bound E[log q(z | s, a)] + H(z) over a dataset of
/// (s, a, z) rows, with the posterior's own input convention.
inline double mi_lower_bound(const Batch& data, const AgentNets& nets) {
  if (data.size() < 1) throw InputError("mi_lower_bound: empty dataset");
  const Vector lq = posterior_log_q(nets, data.s, data.a, data.z_cont, data.z_disc);
  return lq.mean() + nets.latent.prior_entropy();
}

}  // namespace ltd3
