#pragma once

#include <span>
#include <vector>

#include "gradcaps/dense_net.hpp"
#include "gradcaps/rng.hpp"
#include "gradcaps/tape.hpp"

namespace gradcaps {

// Per-component action box. The policy squashes with tanh and rescales, so
// produced actions always lie inside the box.
struct ActionBounds {
  std::vector<double> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double center(int i) const { return 0.5 * (lo[i] + hi[i]); }
  double halfspan(int i) const { return 0.5 * (hi[i] - lo[i]); }
  void validate() const;
  bool operator==(const ActionBounds&) const = default;
};

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// Splits a [batch, 2*dim] feature block into mean and clamped log-std.
struct GaussianHead {
  Tensor2 mean;
  Tensor2 log_std;  // clamped to [kLogStdMin, kLogStdMax]
};
GaussianHead gaussian_head(const Tensor2& features);

struct GaussianHeadVars {
  Var mean;
  Var log_std;
};
GaussianHeadVars gaussian_head(Tape& tape, Var features);

// center + halfspan * tanh(pre), per component.
Tensor2 squash_to_bounds(const Tensor2& pre, const ActionBounds& bounds);
Var squash_to_bounds(Tape& tape, Var pre, const ActionBounds& bounds);

// Squashed-Gaussian actor. The network emits [mean | log_std]; the
// deterministic path used by the regularizers and by evaluation is
// squash(mean), ignoring the noise head.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(int obs_dim, const std::vector<int>& hidden, ActionBounds bounds,
                 Rng& init_rng);

  std::vector<double> act_deterministic(std::span<const double> obs) const;
  Tensor2 act_deterministic_batch(const Tensor2& obs) const;
  std::vector<double> act_stochastic(std::span<const double> obs, Rng& rng) const;

  // Tape path: deterministic actions for regularizer stencils.
  Var deterministic_on_tape(Tape& tape, Var obs, const DenseNet::Params& params) const;

  // Tape path: reparameterized sample and its log-density (summed over
  // action dimensions, [batch, 1]). `noise` must be a [batch, dim] standard
  // normal draw pushed as a leaf by the caller.
  struct Sample {
    Var action;    // in env units
    Var log_prob;  // [batch, 1]
  };
  Sample sample_on_tape(Tape& tape, Var obs, Var noise, const DenseNet::Params& params) const;

  // Plain sample used for target computation; no tape involvement.
  struct PlainSample {
    Tensor2 action;
    Tensor2 log_prob;
  };
  PlainSample sample_batch(const Tensor2& obs, Rng& rng) const;

  DenseNet& net() { return net_; }
  const DenseNet& net() const { return net_; }
  const ActionBounds& bounds() const { return bounds_; }
  int action_dim() const { return bounds_.dim(); }

 private:
  DenseNet net_;
  ActionBounds bounds_;
};

// Deterministic actor for TD3/DDPG: network emits dim pre-activations,
// action = squash(pre).
class DeterministicPolicy {
 public:
  DeterministicPolicy() = default;
  DeterministicPolicy(int obs_dim, const std::vector<int>& hidden, ActionBounds bounds,
                      Rng& init_rng);

  std::vector<double> act(std::span<const double> obs) const;
  Tensor2 act_batch(const Tensor2& obs) const;
  Var act_on_tape(Tape& tape, Var obs, const DenseNet::Params& params) const;

  DenseNet& net() { return net_; }
  const DenseNet& net() const { return net_; }
  const ActionBounds& bounds() const { return bounds_; }

 private:
  DenseNet net_;
  ActionBounds bounds_;
};

}  // namespace gradcaps
