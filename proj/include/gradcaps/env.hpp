#pragma once

#include <memory>
#include <span>
#include <vector>

#include "gradcaps/policy.hpp"
#include "gradcaps/rng.hpp"

namespace gradcaps {

struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  bool done = false;
};

// Single-owner episodic environment. Once done, step() throws until the next
// reset. Stochastic environments draw reset noise from the caller's Rng so
// that training and evaluation can keep separate streams.
class Env {
 public:
  virtual ~Env() = default;
  virtual std::vector<double> reset(Rng& rng) = 0;
  virtual StepResult step(std::span<const double> action) = 0;
  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual ActionBounds action_bounds() const = 0;
  virtual int episode_length() const = 0;
  virtual std::unique_ptr<Env> clone_fresh() const = 0;
};

}  // namespace gradcaps
