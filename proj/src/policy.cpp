#include "gradcaps/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gradcaps/errors.hpp"

namespace gradcaps {

namespace {
constexpr double kSquashGuard = 1e-6;  // keeps log(1 - tanh^2) finite
constexpr double kHalfLog2Pi = 0.9189385332046727;
}  // namespace

void ActionBounds::validate() const {
  if (lo.empty() || lo.size() != hi.size())
    throw ConfigError("action bounds: empty or mismatched");
  for (size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw ConfigError("action bounds: lo must be < hi");
}

GaussianHead gaussian_head(const Tensor2& features) {
  if (features.cols() % 2 != 0)
    throw std::invalid_argument("gaussian_head: feature width must be even");
  const int dim = features.cols() / 2;
  GaussianHead h{Tensor2(features.rows(), dim), Tensor2(features.rows(), dim)};
  for (int i = 0; i < features.rows(); ++i)
    for (int j = 0; j < dim; ++j) {
      h.mean.at(i, j) = features.at(i, j);
      double ls = features.at(i, dim + j);
      ls = ls < kLogStdMin ? kLogStdMin : (ls > kLogStdMax ? kLogStdMax : ls);
      h.log_std.at(i, j) = ls;
    }
  h.mean.ensure_finite("gaussian_head mean");
  return h;
}

GaussianHeadVars gaussian_head(Tape& tape, Var features) {
  const int width = tape.value(features).cols();
  if (width % 2 != 0)
    throw std::invalid_argument("gaussian_head: feature width must be even");
  const int dim = width / 2;
  GaussianHeadVars h;
  h.mean = tape.slice_cols(features, 0, dim);
  h.log_std = tape.clamp(tape.slice_cols(features, dim, width), kLogStdMin, kLogStdMax);
  return h;
}

Tensor2 squash_to_bounds(const Tensor2& pre, const ActionBounds& bounds) {
  if (pre.cols() != bounds.dim())
    throw std::invalid_argument("squash_to_bounds: dimension mismatch");
  Tensor2 out(pre.rows(), pre.cols());
  for (int i = 0; i < pre.rows(); ++i)
    for (int j = 0; j < pre.cols(); ++j)
      out.at(i, j) = bounds.center(j) + bounds.halfspan(j) * std::tanh(pre.at(i, j));
  return out;
}

Var squash_to_bounds(Tape& tape, Var pre, const ActionBounds& bounds) {
  const int dim = bounds.dim();
  if (tape.value(pre).cols() != dim)
    throw std::invalid_argument("squash_to_bounds: dimension mismatch");
  Tensor2 centers(1, dim), spans(1, dim);
  for (int j = 0; j < dim; ++j) {
    centers.at(0, j) = bounds.center(j);
    spans.at(0, j) = bounds.halfspan(j);
  }
  Var t = tape.tanh(pre);
  return tape.add_rowvec(tape.mul_rowvec(t, tape.leaf(spans)), tape.leaf(centers));
}

GaussianPolicy::GaussianPolicy(int obs_dim, const std::vector<int>& hidden,
                               ActionBounds bounds, Rng& init_rng)
    : bounds_(std::move(bounds)) {
  bounds_.validate();
  std::vector<int> sizes{obs_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(2 * bounds_.dim());
  net_ = DenseNet::make(sizes, Activation::Relu, Activation::Identity, init_rng);
}

Tensor2 GaussianPolicy::act_deterministic_batch(const Tensor2& obs) const {
  const GaussianHead head = gaussian_head(net_.forward(obs));
  return squash_to_bounds(head.mean, bounds_);
}

std::vector<double> GaussianPolicy::act_deterministic(std::span<const double> obs) const {
  Tensor2 x(1, static_cast<int>(obs.size()));
  for (size_t i = 0; i < obs.size(); ++i) x.at(0, static_cast<int>(i)) = obs[i];
  const Tensor2 a = act_deterministic_batch(x);
  return a.raw();
}

std::vector<double> GaussianPolicy::act_stochastic(std::span<const double> obs,
                                                   Rng& rng) const {
  Tensor2 x(1, static_cast<int>(obs.size()));
  for (size_t i = 0; i < obs.size(); ++i) x.at(0, static_cast<int>(i)) = obs[i];
  const GaussianHead head = gaussian_head(net_.forward(x));
  std::vector<double> a(bounds_.dim());
  for (int j = 0; j < bounds_.dim(); ++j) {
    const double raw = head.mean.at(0, j) + std::exp(head.log_std.at(0, j)) * rng.gaussian();
    a[j] = bounds_.center(j) + bounds_.halfspan(j) * std::tanh(raw);
  }
  return a;
}

Var GaussianPolicy::deterministic_on_tape(Tape& tape, Var obs,
                                          const DenseNet::Params& params) const {
  const GaussianHeadVars head = gaussian_head(tape, net_.forward(tape, obs, params));
  return squash_to_bounds(tape, head.mean, bounds_);
}

GaussianPolicy::Sample GaussianPolicy::sample_on_tape(Tape& tape, Var obs, Var noise,
                                                      const DenseNet::Params& params) const {
  const int dim = bounds_.dim();
  const GaussianHeadVars head = gaussian_head(tape, net_.forward(tape, obs, params));
  Var std = tape.exp(head.log_std);
  Var raw = tape.add(head.mean, tape.mul(std, noise));
  Var squashed = tape.tanh(raw);

  // log N(raw; mean, std) = -0.5*noise^2 - log_std - 0.5*log(2*pi), then the
  // tanh change of variables subtracts log(1 - tanh^2 + guard) per dim. The
  // constant action rescale is left out; it shifts log-probs uniformly.
  Var neg_half_noise_sq = tape.scale(tape.square(noise), -0.5);
  Var base = tape.add_scalar(tape.sub(neg_half_noise_sq, head.log_std), -kHalfLog2Pi);
  Var one_minus_t2 = tape.add_scalar(tape.neg(tape.square(squashed)), 1.0 + kSquashGuard);
  Var corr = tape.log(one_minus_t2);
  Var log_prob = tape.sum_cols(tape.sub(base, corr));

  Tensor2 centers(1, dim), spans(1, dim);
  for (int j = 0; j < dim; ++j) {
    centers.at(0, j) = bounds_.center(j);
    spans.at(0, j) = bounds_.halfspan(j);
  }
  Var action = tape.add_rowvec(tape.mul_rowvec(squashed, tape.leaf(spans)),
                               tape.leaf(centers));
  return Sample{action, log_prob};
}

GaussianPolicy::PlainSample GaussianPolicy::sample_batch(const Tensor2& obs,
                                                         Rng& rng) const {
  const GaussianHead head = gaussian_head(net_.forward(obs));
  const int dim = bounds_.dim();
  PlainSample out{Tensor2(obs.rows(), dim), Tensor2(obs.rows(), 1)};
  for (int i = 0; i < obs.rows(); ++i) {
    double lp = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double xi = rng.gaussian();
      const double ls = head.log_std.at(i, j);
      const double raw = head.mean.at(i, j) + std::exp(ls) * xi;
      const double t = std::tanh(raw);
      lp += -0.5 * xi * xi - ls - kHalfLog2Pi - std::log(1.0 - t * t + kSquashGuard);
      out.action.at(i, j) = bounds_.center(j) + bounds_.halfspan(j) * t;
    }
    out.log_prob.at(i, 0) = lp;
  }
  out.action.ensure_finite("GaussianPolicy::sample_batch action");
  return out;
}

DeterministicPolicy::DeterministicPolicy(int obs_dim, const std::vector<int>& hidden,
                                         ActionBounds bounds, Rng& init_rng)
    : bounds_(std::move(bounds)) {
  bounds_.validate();
  std::vector<int> sizes{obs_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(bounds_.dim());
  net_ = DenseNet::make(sizes, Activation::Relu, Activation::Identity, init_rng);
}

Tensor2 DeterministicPolicy::act_batch(const Tensor2& obs) const {
  return squash_to_bounds(net_.forward(obs), bounds_);
}

std::vector<double> DeterministicPolicy::act(std::span<const double> obs) const {
  Tensor2 x(1, static_cast<int>(obs.size()));
  for (size_t i = 0; i < obs.size(); ++i) x.at(0, static_cast<int>(i)) = obs[i];
  return act_batch(x).raw();
}

Var DeterministicPolicy::act_on_tape(Tape& tape, Var obs,
                                     const DenseNet::Params& params) const {
  return squash_to_bounds(tape, net_.forward(tape, obs, params), bounds_);
}

}  // namespace gradcaps
