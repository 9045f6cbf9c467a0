#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradcaps/agent.hpp"
#include "gradcaps/env.hpp"
#include "gradcaps/pendulum_env.hpp"
#include "gradcaps/wave_env.hpp"

namespace gradcaps {

struct EnvSpec {
  enum class Type { Wave, Pendulum };
  Type type = Type::Wave;
  WaveSpec wave;
  PendulumSpec pendulum;

  void validate() const;
  std::unique_ptr<Env> make() const;
  bool operator==(const EnvSpec&) const = default;
};

// One experiment: environment, agent, regularizer, seeds and budgets.
// Loadable from TOML (primary) or JSON (alternate, same field names).
struct RunConfig {
  std::string run_id;
  std::string output_dir = "runs";
  std::vector<uint64_t> seeds = {1};
  int64_t total_steps = 20000;
  int eval_interval = 2000;
  int eval_episodes = 10;
  int warmup_steps = 1000;
  int64_t buffer_capacity = 1000000;
  EnvSpec env;
  AgentConfig agent;

  void validate() const;

  static RunConfig from_toml(const std::string& text);
  static RunConfig from_json(const std::string& text);
  // Dispatches on extension: .toml or .json.
  static RunConfig load(const std::string& path);

  std::string to_toml() const;
  // FNV-1a over the canonical TOML form.
  std::string config_hash() const;

  // Output root override from the environment, applied to relative
  // output_dir values.
  std::string resolved_output_dir() const;
  std::string run_dir() const;  // resolved_output_dir()/run_id

  bool operator==(const RunConfig&) const = default;
};

// Name of the env var overriding the output root for relative output dirs.
inline constexpr const char* kOutputRootEnvVar = "GRADCAPS_OUTPUT_ROOT";

}  // namespace gradcaps
