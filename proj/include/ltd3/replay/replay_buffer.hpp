#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "ltd3/errors.hpp"
#include "ltd3/numerics/matrix.hpp"
#include "ltd3/numerics/rng.hpp"

namespace ltd3 {

struct Transition {
  std::vector<double> s;
  std::vector<double> a;
  std::vector<double> s_next;
  double r = 0.0;
  bool done = false;  // environment termination only, never horizon truncation
  std::vector<double> z_cont;
  std::optional<std::size_t> z_disc;
};

/// Row-aligned mini-batch. `z_disc` is empty when the latent has no
/// discrete part.
struct Batch {
  Matrix s, a, s_next;
  Vector r, done;
  Matrix z_cont;
  std::vector<std::size_t> z_disc;

  Eigen::Index size() const { return s.rows(); }
};

struct BufferDims {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::size_t cont_dim = 0;
  bool has_disc = false;
};

/// Fixed-capacity FIFO of transitions with uniform sampling (with
/// replacement). Storage is flat per field and grows lazily to capacity.
class ReplayBuffer {
 public:
  ReplayBuffer(BufferDims dims, std::size_t capacity) : dims_(dims), capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay buffer capacity must be >= 1", "buffer_capacity");
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const BufferDims& dims() const { return dims_; }

  void push(const Transition& t) {
    if (t.s.size() != dims_.state_dim || t.s_next.size() != dims_.state_dim ||
        t.a.size() != dims_.action_dim || t.z_cont.size() != dims_.cont_dim ||
        t.z_disc.has_value() != dims_.has_disc)
      throw DimensionError("ReplayBuffer::push: transition dimensions do not match the buffer");
    if (!std::isfinite(t.r)) throw NumericError("ReplayBuffer::push: non-finite reward");
    const std::size_t slot = cursor_;
    if (size_ < capacity_ && slot == rows_) {
      append(s_, t.s);
      append(a_, t.a);
      append(s_next_, t.s_next);
      append(z_cont_, t.z_cont);
      r_.push_back(t.r);
      done_.push_back(t.done ? 1.0 : 0.0);
      z_disc_.push_back(t.z_disc.value_or(0));
      ++rows_;
    } else {
      overwrite(s_, slot, t.s);
      overwrite(a_, slot, t.a);
      overwrite(s_next_, slot, t.s_next);
      overwrite(z_cont_, slot, t.z_cont);
      r_[slot] = t.r;
      done_[slot] = t.done ? 1.0 : 0.0;
      z_disc_[slot] = t.z_disc.value_or(0);
    }
    cursor_ = (cursor_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
  }

  /// i-th stored transition in insertion order (0 = oldest retained).
  Transition at(std::size_t i) const {
    if (i >= size_) throw BoundsError("ReplayBuffer::at: index out of range");
    return load(physical(i));
  }

  Batch sample_uniform(std::size_t batch, Rng& rng) const {
    if (size_ == 0 || size_ < batch)
      throw StateError("ReplayBuffer::sample_uniform: buffer holds " + std::to_string(size_) +
                       " transitions, batch of " + std::to_string(batch) + " requested");
    std::uniform_int_distribution<std::size_t> u(0, size_ - 1);
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = u(rng);
    return gather(idx);
  }

  /// The most recent `n` transitions (fewer if the buffer holds fewer).
  Batch recent(std::size_t n) const {
    n = std::min(n, size_);
    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = physical(size_ - n + k);
    return gather(idx);
  }

  /// Physical slot indices, exposed for sampling diagnostics.
  Batch gather(const std::vector<std::size_t>& slots) const {
    const auto n = static_cast<Eigen::Index>(slots.size());
    Batch b;
    b.s.resize(n, static_cast<Eigen::Index>(dims_.state_dim));
    b.s_next.resize(n, static_cast<Eigen::Index>(dims_.state_dim));
    b.a.resize(n, static_cast<Eigen::Index>(dims_.action_dim));
    b.z_cont.resize(n, static_cast<Eigen::Index>(dims_.cont_dim));
    b.r.resize(n);
    b.done.resize(n);
    if (dims_.has_disc) b.z_disc.resize(slots.size());
    for (Eigen::Index k = 0; k < n; ++k) {
      const std::size_t i = slots[static_cast<std::size_t>(k)];
      copy_row(s_, dims_.state_dim, i, b.s, k);
      copy_row(s_next_, dims_.state_dim, i, b.s_next, k);
      copy_row(a_, dims_.action_dim, i, b.a, k);
      copy_row(z_cont_, dims_.cont_dim, i, b.z_cont, k);
      b.r(k) = r_[i];
      b.done(k) = done_[i];
      if (dims_.has_disc) b.z_disc[static_cast<std::size_t>(k)] = z_disc_[i];
    }
    return b;
  }

 private:
  std::size_t physical(std::size_t logical) const {
    return size_ < capacity_ ? logical : (cursor_ + logical) % capacity_;
  }

  static void append(std::vector<double>& store, const std::vector<double>& v) {
    store.insert(store.end(), v.begin(), v.end());
  }
  static void overwrite(std::vector<double>& store, std::size_t slot, const std::vector<double>& v) {
    std::copy(v.begin(), v.end(), store.begin() + static_cast<std::ptrdiff_t>(slot * v.size()));
  }
  static void copy_row(const std::vector<double>& store, std::size_t width, std::size_t slot,
                       Matrix& out, Eigen::Index row) {
    for (std::size_t j = 0; j < width; ++j)
      out(row, static_cast<Eigen::Index>(j)) = store[slot * width + j];
  }

  Transition load(std::size_t i) const {
    Transition t;
    auto slice = [&](const std::vector<double>& store, std::size_t w) {
      return std::vector<double>(store.begin() + static_cast<std::ptrdiff_t>(i * w),
                                 store.begin() + static_cast<std::ptrdiff_t>((i + 1) * w));
    };
    t.s = slice(s_, dims_.state_dim);
    t.a = slice(a_, dims_.action_dim);
    t.s_next = slice(s_next_, dims_.state_dim);
    t.z_cont = slice(z_cont_, dims_.cont_dim);
    t.r = r_[i];
    t.done = done_[i] != 0.0;
    if (dims_.has_disc) t.z_disc = z_disc_[i];
    return t;
  }

  BufferDims dims_;
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t rows_ = 0;
  std::size_t cursor_ = 0;
  std::vector<double> s_, a_, s_next_, z_cont_, r_, done_;
  std::vector<std::size_t> z_disc_;
};

}  // namespace ltd3
