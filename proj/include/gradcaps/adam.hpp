#pragma once

#include <cstdint>
#include <vector>

#include "gradcaps/tensor.hpp"

namespace gradcaps {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over a fixed list of parameter tensors. Moment state
// is shaped on the first step and shapes must not change afterwards.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(const std::vector<Tensor2*>& params, const std::vector<const Tensor2*>& grads);

  int64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  int64_t t_ = 0;
  std::vector<Tensor2> m_, v_;
};

}  // namespace gradcaps
