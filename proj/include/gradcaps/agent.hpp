#pragma once

#include <optional>
#include <string>

#include "gradcaps/adam.hpp"
#include "gradcaps/policy.hpp"
#include "gradcaps/replay.hpp"
#include "gradcaps/smoothness.hpp"

namespace gradcaps {

enum class Algorithm { Sac, Td3 };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct AgentConfig {
  Algorithm algorithm = Algorithm::Sac;
  double gamma = 0.99;
  double tau = 0.005;
  double lr = 3e-4;
  int batch_size = 256;
  std::vector<int> hidden = {64, 64};

  // SAC entropy temperature: auto-tuned towards -action_dim, or fixed.
  bool entropy_auto = true;
  double alpha = 0.2;

  // TD3 knobs. In ddpg_mode the twin critic is dropped, the policy delay
  // becomes 1 and target smoothing noise is zero.
  int policy_delay = 2;
  double target_noise = 0.2;
  double target_noise_clip = 0.5;
  double exploration_noise = 0.1;
  bool ddpg_mode = false;

  RegularizerSpec regularizer;

  void validate() const;
  bool operator==(const AgentConfig&) const = default;
};

// Frozen deterministic view of an actor, used for evaluation, checkpoints
// and best-policy bookkeeping.
struct PolicySnapshot {
  bool stochastic = true;  // network emits [mean | log_std] when true
  DenseNet net;
  ActionBounds bounds;

  std::vector<double> act(std::span<const double> obs) const;
};

struct UpdateDiag {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  bool actor_updated = false;
  double temporal_loss = 0.0;  // unweighted batch-mean temporal term
  double spatial_loss = 0.0;
  double alpha = 0.0;
  double q_target_mean = 0.0;
};

// Off-policy actor-critic agent (SAC or TD3/DDPG) with an optional
// smoothness term added to the actor objective. Each update consumes one
// TripleBatch; the Grad-CAPS stencil recomputes deterministic actions at
// (s_prev, s, s_next) so gradients flow through all three points.
class Agent {
 public:
  Agent(const AgentConfig& cfg, int obs_dim, ActionBounds bounds, Rng init_rng);

  std::vector<double> act_deterministic(std::span<const double> obs) const;
  std::vector<double> act_explore(std::span<const double> obs, Rng& explore_rng) const;

  UpdateDiag update(const TripleBatch& batch, Rng& update_rng, Rng& reg_rng);

  // Actor loss on a throwaway tape; streams are taken by value so repeated
  // calls are side-effect free. Test hook for cross-module checks.
  double actor_loss_value(const TripleBatch& batch, Rng update_rng, Rng reg_rng,
                          const RegularizerSpec& spec) const;

  PolicySnapshot snapshot_policy() const;

  const AgentConfig& config() const { return cfg_; }
  int obs_dim() const { return obs_dim_; }
  const ActionBounds& bounds() const { return bounds_; }
  double alpha() const { return alpha_; }
  int64_t updates_done() const { return update_count_; }

  // Exposed for targeted tests (soft-update convexity, ddpg degeneracy).
  const DenseNet& critic1() const { return q1_; }
  const DenseNet& critic1_target() const { return q1_target_; }
  const DenseNet& critic2() const { return q2_; }
  const DenseNet& critic2_target() const { return q2_target_; }
  bool twin_critics() const { return twin_; }
  const DenseNet& actor_net() const;

 private:
  struct ActorLossParts {
    Var total;
    double temporal_value = 0.0;
    double spatial_value = 0.0;
  };

  UpdateDiag update_sac(const TripleBatch& batch, Rng& update_rng, Rng& reg_rng);
  UpdateDiag update_td3(const TripleBatch& batch, Rng& update_rng, Rng& reg_rng);

  // Deterministic action stencil for either actor type.
  Var det_action_on_tape(Tape& tape, Var obs, const DenseNet::Params& params) const;
  // lambda-weighted regularizer contribution added to `vanilla`.
  ActorLossParts add_regularizer(Tape& tape, Var vanilla, const TripleBatch& batch,
                                 Var s_var, const DenseNet::Params& actor_params,
                                 const RegularizerSpec& spec, Rng& reg_rng) const;

  Tensor2 td3_target_actions(const TripleBatch& batch, Rng& update_rng) const;

  AgentConfig cfg_;
  int obs_dim_ = 0;
  ActionBounds bounds_;
  bool twin_ = true;
  int effective_delay_ = 2;
  double effective_target_noise_ = 0.2;

  std::optional<GaussianPolicy> gauss_;
  std::optional<DeterministicPolicy> det_;
  std::optional<DeterministicPolicy> det_target_;
  DenseNet q1_, q2_, q1_target_, q2_target_;

  Adam actor_opt_, critic_opt_, alpha_opt_;
  Tensor2 log_alpha_;
  double alpha_ = 0.2;
  double target_entropy_ = -1.0;
  int64_t update_count_ = 0;
};

}  // namespace gradcaps
