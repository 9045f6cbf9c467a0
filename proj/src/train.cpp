#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "gradcaps/checkpoint.hpp"
#include "gradcaps/errors.hpp"
#include "gradcaps/runner.hpp"
#include "gradcaps/smoothness.hpp"
#include "gradcaps/util.hpp"

namespace gradcaps {

namespace {

struct EvalStats {
  double mean_return = 0.0;
  double std_return = 0.0;
  double fluctuation = 0.0;
  double lipschitz_k1 = 0.0;
  double lipschitz_k2 = 0.0;
};

// Macro-averaged evaluation of the deterministic policy: per-episode
// fluctuation and Lipschitz estimates averaged over episodes.
EvalStats evaluate_policy(const PolicySnapshot& policy, Env& env, Rng& eval_rng,
                          int episodes) {
  ActorFn actor = [&policy](std::span<const double> obs, int) {
    return policy.act(obs);
  };
  EvalStats st;
  std::vector<double> returns;
  for (int e = 0; e < episodes; ++e) {
    EpisodeTrace trace = record_trace(actor, env, eval_rng);
    returns.push_back(trace.ret);
    st.fluctuation += action_fluctuation(trace);
    st.lipschitz_k1 += estimate_lipschitz(
        std::span<const std::vector<double>>(trace.actions), 1);
    st.lipschitz_k2 += estimate_lipschitz(
        std::span<const std::vector<double>>(trace.actions), 2);
  }
  st.fluctuation /= episodes;
  st.lipschitz_k1 /= episodes;
  st.lipschitz_k2 /= episodes;
  for (double r : returns) st.mean_return += r;
  st.mean_return /= episodes;
  if (episodes > 1) {
    double var = 0.0;
    for (double r : returns) var += (r - st.mean_return) * (r - st.mean_return);
    st.std_return = std::sqrt(var / (episodes - 1));
  }
  return st;
}

}  // namespace

TrainResult train_one_seed(const RunConfig& cfg, uint64_t seed,
                           const std::string& run_dir) {
  const auto t_start = std::chrono::steady_clock::now();

  Rng init_rng = derive_stream(seed, Stream::Init);
  Rng env_rng = derive_stream(seed, Stream::Env);
  Rng eval_rng = derive_stream(seed, Stream::EvalEnv);
  Rng explore_rng = derive_stream(seed, Stream::Explore);
  Rng sampling_rng = derive_stream(seed, Stream::Sampling);
  Rng update_rng = derive_stream(seed, Stream::UpdateNoise);
  Rng reg_rng = derive_stream(seed, Stream::Regularizer);

  std::unique_ptr<Env> env = cfg.env.make();
  std::unique_ptr<Env> eval_env = env->clone_fresh();
  const ActionBounds bounds = env->action_bounds();
  Agent agent(cfg.agent, env->obs_dim(), bounds, init_rng);
  ReplayBuffer buffer(static_cast<size_t>(cfg.buffer_capacity), env->obs_dim(),
                      env->action_dim());

  const std::string csv_name = "metrics_seed" + std::to_string(seed) + ".csv";
  std::ofstream csv(std::filesystem::path(run_dir) / csv_name,
                    std::ios::binary | std::ios::trunc);
  if (!csv) throw RuntimeAbort("cannot open metrics csv in " + run_dir);
  csv << kMetricsCsvHeader << "\n";

  TrainResult result;
  result.seed_result.seed = seed;
  result.best_policy = agent.snapshot_policy();
  double best_return = -std::numeric_limits<double>::infinity();
  double best_std = 0.0;

  // Diagnostics averaged between CSV rows.
  double acc_actor = 0.0, acc_critic = 0.0, acc_temporal = 0.0;
  int64_t n_actor = 0, n_critic = 0;

  std::vector<double> obs = env->reset(env_rng);
  std::optional<std::vector<double>> prev_obs;
  uint32_t episode_id = 0;
  uint32_t step_in_episode = 0;

  auto run_eval = [&](int64_t step) {
    PolicySnapshot snap = agent.snapshot_policy();
    EvalStats st = evaluate_policy(snap, *eval_env, eval_rng, cfg.eval_episodes);
    csv << step << ',' << seed << ',' << fmt_double(st.mean_return) << ','
        << fmt_double(st.std_return) << ',' << fmt_double(st.fluctuation) << ','
        << fmt_double(st.lipschitz_k1) << ',' << fmt_double(st.lipschitz_k2) << ','
        << fmt_double(n_actor ? acc_actor / n_actor : 0.0) << ','
        << fmt_double(n_critic ? acc_critic / n_critic : 0.0) << ','
        << fmt_double(n_actor ? acc_temporal / n_actor : 0.0) << "\n";
    acc_actor = acc_critic = acc_temporal = 0.0;
    n_actor = n_critic = 0;
    // Metrics of record are those of the best policy, matching the
    // best-checkpoint evaluation convention.
    if (st.mean_return > best_return) {
      best_return = st.mean_return;
      best_std = st.std_return;
      result.best_policy = std::move(snap);
      result.seed_result.final_fluctuation = st.fluctuation;
      result.seed_result.final_lipschitz_k1 = st.lipschitz_k1;
      result.seed_result.final_lipschitz_k2 = st.lipschitz_k2;
    }
  };

  for (int64_t step = 1; step <= cfg.total_steps; ++step) {
    std::vector<double> action(bounds.dim());
    if (step <= cfg.warmup_steps) {
      for (int j = 0; j < bounds.dim(); ++j)
        action[j] = explore_rng.uniform(bounds.lo[j], bounds.hi[j]);
    } else {
      action = agent.act_explore(obs, explore_rng);
    }
    StepResult sr = env->step(action);

    Transition tr;
    tr.s_prev = prev_obs;
    tr.s = obs;
    tr.a = action;
    tr.r = sr.reward;
    tr.s_next = sr.obs;
    tr.done = sr.done;
    tr.episode_id = episode_id;
    tr.step_idx = step_in_episode;
    buffer.push(tr);

    prev_obs = std::move(obs);
    obs = std::move(sr.obs);
    ++step_in_episode;
    if (sr.done) {
      obs = env->reset(env_rng);
      prev_obs.reset();
      ++episode_id;
      step_in_episode = 0;
    }

    if (step > cfg.warmup_steps &&
        buffer.triple_count() >= static_cast<size_t>(cfg.agent.batch_size)) {
      TripleBatch batch = buffer.sample_triples(cfg.agent.batch_size, sampling_rng);
      UpdateDiag diag = agent.update(batch, update_rng, reg_rng);
      acc_critic += diag.critic_loss;
      ++n_critic;
      if (diag.actor_updated) {
        acc_actor += diag.actor_loss;
        acc_temporal += diag.temporal_loss;
        ++n_actor;
      }
    }

    const bool at_interval = step % cfg.eval_interval == 0;
    if (at_interval || step == cfg.total_steps) run_eval(step);
  }

  // Persist the best policy and its rollout trace.
  const std::string ckpt_name = "policy_seed" + std::to_string(seed) + ".json";
  Checkpoint ckpt;
  ckpt.config_hash = cfg.config_hash();
  ckpt.seed = seed;
  ckpt.best_return = best_return;
  ckpt.env = cfg.env;
  ckpt.policy = result.best_policy;
  save_checkpoint((std::filesystem::path(run_dir) / ckpt_name).string(), ckpt);

  const std::string trace_name = "trace_seed" + std::to_string(seed) + ".csv";
  {
    ActorFn actor = [&](std::span<const double> o, int) {
      return result.best_policy.act(o);
    };
    std::unique_ptr<Env> trace_env = env->clone_fresh();
    Rng trace_rng = derive_stream(seed, Stream::EvalEnv);
    EpisodeTrace trace = record_trace(actor, *trace_env, trace_rng);
    std::ostringstream tr_out;
    if (cfg.env.type == EnvSpec::Type::Wave) {
      tr_out << "step,reference,predicted,reward\n";
      for (int t = 0; t < trace.length(); ++t)
        tr_out << t << ',' << fmt_double(waveform_value(cfg.env.wave, t + 1)) << ','
               << fmt_double(trace.actions[t][0]) << ','
               << fmt_double(trace.rewards[t]) << "\n";
    } else {
      tr_out << "step,action,reward\n";
      for (int t = 0; t < trace.length(); ++t)
        tr_out << t << ',' << fmt_double(trace.actions[t][0]) << ','
               << fmt_double(trace.rewards[t]) << "\n";
    }
    write_file_atomic((std::filesystem::path(run_dir) / trace_name).string(),
                      tr_out.str());
  }

  csv.flush();
  if (!csv) throw RuntimeAbort("failed writing metrics csv in " + run_dir);

  result.seed_result.best_return = best_return;
  result.seed_result.best_return_std = best_std;
  result.seed_result.metrics_csv = csv_name;
  result.seed_result.checkpoint = ckpt_name;
  result.seed_result.trace_csv = trace_name;
  result.seed_result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace gradcaps
