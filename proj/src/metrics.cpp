#include "gradcaps/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "gradcaps/smoothness.hpp"

namespace gradcaps {

EpisodeTrace record_trace(const ActorFn& actor, Env& env, Rng& reset_rng) {
  EpisodeTrace trace;
  std::vector<double> obs = env.reset(reset_rng);
  int t = 0;
  while (true) {
    std::vector<double> a = actor(obs, t);
    StepResult sr = env.step(a);
    trace.actions.push_back(std::move(a));
    trace.rewards.push_back(sr.reward);
    trace.ret += sr.reward;
    obs = std::move(sr.obs);
    ++t;
    if (sr.done) break;
  }
  return trace;
}

std::pair<double, double> average_reward(const ActorFn& actor, Env& env, Rng& reset_rng,
                                         int n_episodes) {
  if (n_episodes < 1)
    throw std::invalid_argument("average_reward: n_episodes must be >= 1");
  std::vector<double> returns;
  returns.reserve(n_episodes);
  for (int e = 0; e < n_episodes; ++e)
    returns.push_back(record_trace(actor, env, reset_rng).ret);
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= n_episodes;
  double var = 0.0;
  if (n_episodes > 1) {
    for (double r : returns) var += (r - mean) * (r - mean);
    var /= (n_episodes - 1);
  }
  return {mean, std::sqrt(var)};
}

double action_fluctuation(const EpisodeTrace& trace) {
  if (trace.actions.size() < 2)
    throw std::invalid_argument("action_fluctuation: trace too short");
  double sum = 0.0;
  for (size_t t = 1; t < trace.actions.size(); ++t)
    sum += caps_temporal_loss(trace.actions[t - 1], trace.actions[t]);
  return sum / static_cast<double>(trace.actions.size() - 1);
}

}  // namespace gradcaps
