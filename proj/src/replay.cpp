#include "gradcaps/replay.hpp"

#include <stdexcept>

#include "gradcaps/errors.hpp"

namespace gradcaps {

ReplayBuffer::ReplayBuffer(size_t capacity, int obs_dim, int act_dim)
    : capacity_(capacity), obs_dim_(obs_dim), act_dim_(act_dim) {
  if (capacity < 3) throw std::invalid_argument("ReplayBuffer: capacity < 3");
  if (obs_dim < 1 || act_dim < 1)
    throw std::invalid_argument("ReplayBuffer: bad dimensions");
  s_.resize(capacity * obs_dim);
  s_next_.resize(capacity * obs_dim);
  a_.resize(capacity * act_dim);
  r_.resize(capacity);
  done_.resize(capacity);
  episode_.resize(capacity);
  step_.resize(capacity);
  center_pos_.assign(capacity, -1);
}

bool ReplayBuffer::adjacent(size_t earlier, size_t later) const {
  return episode_[earlier] == episode_[later] &&
         step_[earlier] + 1 == step_[later];
}

void ReplayBuffer::add_center(size_t slot) {
  if (center_pos_[slot] >= 0) return;
  center_pos_[slot] = static_cast<int32_t>(centers_.size());
  centers_.push_back(static_cast<uint32_t>(slot));
}

void ReplayBuffer::remove_center(size_t slot) {
  const int32_t pos = center_pos_[slot];
  if (pos < 0) return;
  const uint32_t last = centers_.back();
  centers_[pos] = last;
  center_pos_[last] = pos;
  centers_.pop_back();
  center_pos_[slot] = -1;
}

void ReplayBuffer::push(const Transition& t) {
  if (static_cast<int>(t.s.size()) != obs_dim_ ||
      static_cast<int>(t.s_next.size()) != obs_dim_ ||
      static_cast<int>(t.a.size()) != act_dim_)
    throw std::invalid_argument("ReplayBuffer::push: dimension mismatch");
  if (t.s_prev && static_cast<int>(t.s_prev->size()) != obs_dim_)
    throw std::invalid_argument("ReplayBuffer::push: s_prev dimension mismatch");

  const size_t slot = head_;
  // Overwriting invalidates any triple touching this slot.
  if (size_ == capacity_) {
    remove_center(prev_slot(slot));
    remove_center(slot);
    remove_center(next_slot(slot));
  }

  for (int j = 0; j < obs_dim_; ++j) {
    s_[slot * obs_dim_ + j] = t.s[j];
    s_next_[slot * obs_dim_ + j] = t.s_next[j];
  }
  for (int j = 0; j < act_dim_; ++j) a_[slot * act_dim_ + j] = t.a[j];
  r_[slot] = t.r;
  done_[slot] = t.done ? 1 : 0;
  episode_[slot] = t.episode_id;
  step_[slot] = t.step_idx;

  head_ = next_slot(head_);
  if (size_ < capacity_) ++size_;

  // The slot written just before `slot` may now be a complete center.
  if (size_ >= 3) {
    const size_t mid = prev_slot(slot);
    const size_t lo = prev_slot(mid);
    if (adjacent(lo, mid) && adjacent(mid, slot)) add_center(mid);
  }
}

bool ReplayBuffer::is_center(size_t slot) const { return center_pos_[slot] >= 0; }

TripleBatch ReplayBuffer::sample_triples(int n, Rng& rng) const {
  if (n < 1) throw std::invalid_argument("sample_triples: n must be >= 1");
  if (centers_.size() < static_cast<size_t>(n))
    throw RuntimeAbort("sample_triples: insufficient valid triples in buffer");
  TripleBatch b{Tensor2(n, obs_dim_), Tensor2(n, obs_dim_), Tensor2(n, obs_dim_),
                Tensor2(n, act_dim_), Tensor2(n, 1), Tensor2(n, 1)};
  for (int i = 0; i < n; ++i) {
    const size_t c = centers_[rng.uniform_int(static_cast<int>(centers_.size()))];
    const size_t p = prev_slot(c);
    for (int j = 0; j < obs_dim_; ++j) {
      b.s_prev.at(i, j) = s_[p * obs_dim_ + j];
      b.s.at(i, j) = s_[c * obs_dim_ + j];
      b.s_next.at(i, j) = s_next_[c * obs_dim_ + j];
    }
    for (int j = 0; j < act_dim_; ++j) b.a.at(i, j) = a_[c * act_dim_ + j];
    b.r.at(i, 0) = r_[c];
    b.done.at(i, 0) = done_[c] ? 1.0 : 0.0;
  }
  return b;
}

}  // namespace gradcaps
