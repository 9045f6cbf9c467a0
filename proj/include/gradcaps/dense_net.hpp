#pragma once

#include <vector>

#include "gradcaps/tape.hpp"
#include "gradcaps/tensor.hpp"

namespace gradcaps {

enum class Activation { Identity, Relu, Tanh };

// Fully connected MLP. Layer k maps sizes[k] -> sizes[k+1] with weight
// [in,out] and bias [1,out]; hidden activations after every layer but the
// last, output activation after the last. Parameter shapes are fixed at
// construction.
class DenseNet {
 public:
  DenseNet() = default;
  // Weights and biases initialized uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  static DenseNet make(std::vector<int> sizes, Activation hidden, Activation output,
                       Rng& rng);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int layers() const { return static_cast<int>(weights_.size()); }
  Activation hidden_activation() const { return hidden_act_; }
  Activation output_activation() const { return output_act_; }
  const std::vector<int>& sizes() const { return sizes_; }

  // Pure forward pass; same parameters and input give bit-identical output.
  Tensor2 forward(const Tensor2& input) const;

  // Tape-recorded forward pass through previously pushed parameter vars.
  // trainable=false pushes parameters as constants (no gradients tracked),
  // e.g. critic weights inside the actor objective.
  struct Params {
    std::vector<Var> w, b;
  };
  Params push_params(Tape& tape, bool trainable = true) const;
  Var forward(Tape& tape, Var input, const Params& params) const;

  size_t param_count() const;
  std::vector<Tensor2*> param_ptrs();
  std::vector<const Tensor2*> param_ptrs() const;
  // Pull updated values back from tape gradients' counterpart vars.
  void assign_from(const Tape& tape, const Params& params);

  // this <- tau * online + (1 - tau) * this, parameter-wise.
  void soft_update_from(const DenseNet& online, double tau);

  Tensor2& weight(int layer) { return weights_[layer]; }
  Tensor2& bias(int layer) { return biases_[layer]; }
  const Tensor2& weight(int layer) const { return weights_[layer]; }
  const Tensor2& bias(int layer) const { return biases_[layer]; }

 private:
  std::vector<int> sizes_;
  Activation hidden_act_ = Activation::Relu;
  Activation output_act_ = Activation::Identity;
  std::vector<Tensor2> weights_;
  std::vector<Tensor2> biases_;
};

}  // namespace gradcaps
