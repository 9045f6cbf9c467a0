#pragma once

#include <cstdint>
#include <string>

#include "gradcaps/agent.hpp"
#include "gradcaps/config.hpp"

namespace gradcaps {

// Versioned JSON policy checkpoint: actor parameters, action bounds, the
// environment spec needed to evaluate it, and the config hash of the run
// that produced it.
struct Checkpoint {
  int version = 1;
  std::string config_hash;
  uint64_t seed = 0;
  double best_return = 0.0;
  EnvSpec env;
  PolicySnapshot policy;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace gradcaps
