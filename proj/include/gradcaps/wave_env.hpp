#pragma once

#include "gradcaps/env.hpp"

namespace gradcaps {

struct WaveSpec {
  enum class Kind { Square, Cosine };
  Kind kind = Kind::Square;
  double amplitude = 1.0;
  int period = 50;
  int episode_length = 200;
  double action_low = -2.0;
  double action_high = 2.0;

  void validate() const;  // period >= 2, episode_length >= period
  bool operator==(const WaveSpec&) const = default;
};

// Reference trajectory value at integer step t.
// square: +amplitude while t mod period < period/2, else -amplitude;
// cosine: amplitude * cos(2*pi*t / period).
double waveform_value(const WaveSpec& spec, int t);

// Trajectory tracking task: the agent observes [dist_t, pos_t] and predicts
// the next target point; it is moved to its prediction and rewarded with the
// negative prediction error. Fully deterministic.
class WaveEnv final : public Env {
 public:
  explicit WaveEnv(WaveSpec spec);

  std::vector<double> reset(Rng& rng) override;
  StepResult step(std::span<const double> action) override;
  int obs_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  ActionBounds action_bounds() const override;
  int episode_length() const override { return spec_.episode_length; }
  std::unique_ptr<Env> clone_fresh() const override;

  const WaveSpec& spec() const { return spec_; }
  int step_index() const { return t_; }
  bool done() const { return done_; }

 private:
  WaveSpec spec_;
  int t_ = 0;
  double pos_ = 0.0;
  bool done_ = true;  // must reset first
};

}  // namespace gradcaps
