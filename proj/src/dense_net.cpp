#include "gradcaps/dense_net.hpp"

#include <cmath>
#include <stdexcept>

namespace gradcaps {

DenseNet DenseNet::make(std::vector<int> sizes, Activation hidden, Activation output,
                        Rng& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("DenseNet: need >= 2 layer sizes");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("DenseNet: non-positive layer size");
  DenseNet net;
  net.sizes_ = std::move(sizes);
  net.hidden_act_ = hidden;
  net.output_act_ = output;
  for (size_t k = 0; k + 1 < net.sizes_.size(); ++k) {
    const int fan_in = net.sizes_[k];
    const int fan_out = net.sizes_[k + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    net.weights_.push_back(Tensor2::uniform(fan_in, fan_out, -bound, bound, rng));
    net.biases_.push_back(Tensor2::uniform(1, fan_out, -bound, bound, rng));
  }
  return net;
}

namespace {

void apply_activation(Tensor2& t, Activation act) {
  switch (act) {
    case Activation::Identity: return;
    case Activation::Relu:
      for (auto& v : t.raw()) v = v > 0.0 ? v : 0.0;
      return;
    case Activation::Tanh:
      for (auto& v : t.raw()) v = std::tanh(v);
      return;
  }
}

}  // namespace

Tensor2 DenseNet::forward(const Tensor2& input) const {
  if (input.cols() != input_size())
    throw std::invalid_argument("DenseNet::forward: input width mismatch");
  Tensor2 x = input;
  for (int k = 0; k < layers(); ++k) {
    Tensor2 y = matmul(x, weights_[k]);
    for (int i = 0; i < y.rows(); ++i)
      for (int j = 0; j < y.cols(); ++j) y.at(i, j) += biases_[k].at(0, j);
    apply_activation(y, k + 1 < layers() ? hidden_act_ : output_act_);
    x = std::move(y);
  }
  x.ensure_finite("DenseNet::forward output");
  return x;
}

DenseNet::Params DenseNet::push_params(Tape& tape, bool trainable) const {
  Params p;
  for (int k = 0; k < layers(); ++k) {
    p.w.push_back(trainable ? tape.param(weights_[k]) : tape.leaf(weights_[k]));
    p.b.push_back(trainable ? tape.param(biases_[k]) : tape.leaf(biases_[k]));
  }
  return p;
}

Var DenseNet::forward(Tape& tape, Var input, const Params& params) const {
  if (tape.value(input).cols() != input_size())
    throw std::invalid_argument("DenseNet::forward: input width mismatch");
  Var x = input;
  for (int k = 0; k < layers(); ++k) {
    Var y = tape.add_rowvec(tape.matmul(x, params.w[k]), params.b[k]);
    const Activation act = k + 1 < layers() ? hidden_act_ : output_act_;
    if (act == Activation::Relu) y = tape.relu(y);
    else if (act == Activation::Tanh) y = tape.tanh(y);
    x = y;
  }
  return x;
}

size_t DenseNet::param_count() const {
  size_t n = 0;
  for (const auto& w : weights_) n += w.size();
  for (const auto& b : biases_) n += b.size();
  return n;
}

std::vector<Tensor2*> DenseNet::param_ptrs() {
  std::vector<Tensor2*> out;
  for (int k = 0; k < layers(); ++k) {
    out.push_back(&weights_[k]);
    out.push_back(&biases_[k]);
  }
  return out;
}

std::vector<const Tensor2*> DenseNet::param_ptrs() const {
  std::vector<const Tensor2*> out;
  for (int k = 0; k < layers(); ++k) {
    out.push_back(&weights_[k]);
    out.push_back(&biases_[k]);
  }
  return out;
}

void DenseNet::assign_from(const Tape& tape, const Params& params) {
  for (int k = 0; k < layers(); ++k) {
    weights_[k] = tape.value(params.w[k]);
    biases_[k] = tape.value(params.b[k]);
  }
}

void DenseNet::soft_update_from(const DenseNet& online, double tau) {
  if (online.sizes_ != sizes_)
    throw std::invalid_argument("soft_update_from: architecture mismatch");
  for (int k = 0; k < layers(); ++k) {
    for (size_t i = 0; i < weights_[k].size(); ++i)
      weights_[k].raw()[i] = tau * online.weights_[k].raw()[i] +
                             (1.0 - tau) * weights_[k].raw()[i];
    for (size_t i = 0; i < biases_[k].size(); ++i)
      biases_[k].raw()[i] = tau * online.biases_[k].raw()[i] +
                            (1.0 - tau) * biases_[k].raw()[i];
  }
}

}  // namespace gradcaps
