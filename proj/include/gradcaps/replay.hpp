#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gradcaps/rng.hpp"
#include "gradcaps/tensor.hpp"

namespace gradcaps {

struct Transition {
  std::optional<std::vector<double>> s_prev;  // absent at episode start
  std::vector<double> s;
  std::vector<double> a;
  double r = 0.0;
  std::vector<double> s_next;
  bool done = false;
  uint32_t episode_id = 0;
  uint32_t step_idx = 0;
};

// Batch of consecutive-state triples. Every row's (s_prev, s, s_next) are
// three consecutive decision states of one episode; the standard fields
// (s, a, r, s_next, done) come from the middle transition.
struct TripleBatch {
  Tensor2 s_prev, s, s_next;  // [B, obs_dim]
  Tensor2 a;                  // [B, act_dim]
  Tensor2 r, done;            // [B, 1]
  int size() const { return s.rows(); }
};

// Ring replay buffer that tracks which slots are valid triple centers: a
// center needs both physical neighbours occupied, same episode, and
// consecutive step indices. Episode boundaries are therefore never
// straddled, including after the ring wraps.
class ReplayBuffer {
 public:
  ReplayBuffer(size_t capacity, int obs_dim, int act_dim);

  void push(const Transition& t);
  size_t size() const { return size_; }
  size_t capacity() const { return capacity_; }
  size_t triple_count() const { return centers_.size(); }

  // Uniform over valid centers, with replacement. Throws RuntimeAbort when
  // fewer than n valid triples exist (n > 0 and count >= 1 suffice because
  // sampling is with replacement, but callers want at least n distinct
  // candidates before training starts; we enforce count >= n).
  TripleBatch sample_triples(int n, Rng& rng) const;

 private:
  bool is_center(size_t slot) const;
  void add_center(size_t slot);
  void remove_center(size_t slot);
  size_t prev_slot(size_t s) const { return (s + capacity_ - 1) % capacity_; }
  size_t next_slot(size_t s) const { return (s + 1) % capacity_; }
  bool adjacent(size_t earlier, size_t later) const;

  size_t capacity_;
  int obs_dim_, act_dim_;
  size_t head_ = 0;  // next write position
  size_t size_ = 0;

  std::vector<double> s_, a_, s_next_;
  std::vector<double> r_;
  std::vector<uint8_t> done_;
  std::vector<uint32_t> episode_;
  std::vector<uint32_t> step_;

  std::vector<uint32_t> centers_;      // slots usable as triple centers
  std::vector<int32_t> center_pos_;    // slot -> index in centers_, or -1
};

}  // namespace gradcaps
