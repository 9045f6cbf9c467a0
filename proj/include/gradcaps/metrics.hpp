#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gradcaps/env.hpp"

namespace gradcaps {

// One deterministic rollout: actions and rewards in step order.
struct EpisodeTrace {
  std::vector<std::vector<double>> actions;
  std::vector<double> rewards;
  double ret = 0.0;  // undiscounted sum of rewards
  int length() const { return static_cast<int>(rewards.size()); }
};

// Step-indexed actor so scripted oracles can see the clock; learned policies
// ignore the index.
using ActorFn = std::function<std::vector<double>(std::span<const double> obs, int t)>;

EpisodeTrace record_trace(const ActorFn& actor, Env& env, Rng& reset_rng);

// Mean and sample std of undiscounted returns over n_episodes rollouts.
std::pair<double, double> average_reward(const ActorFn& actor, Env& env, Rng& reset_rng,
                                         int n_episodes = 10);

// Mean over steps of ||a_t - a_{t-1}||_2; needs at least two actions.
double action_fluctuation(const EpisodeTrace& trace);

}  // namespace gradcaps
