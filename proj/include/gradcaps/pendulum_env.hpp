#pragma once

#include "gradcaps/env.hpp"

namespace gradcaps {

struct PendulumSpec {
  double mass = 1.0;
  double length = 1.0;
  double gravity = 10.0;
  double dt = 0.005;
  double max_torque = 2.0;
  double max_speed = 8.0;
  int episode_length = 1000;

  void validate() const;  // all physical constants positive
  bool operator==(const PendulumSpec&) const = default;
};

// Torque-limited swing-up. theta = 0 is upright; dynamics
//   theta_dd = (3g / 2l) sin(theta) + (3 / m l^2) u
// integrated with semi-implicit Euler at dt, angular velocity clamped to
// max_speed. Observation [cos(theta), sin(theta), theta_dot]; reward
// -(theta_norm^2 + 0.1 theta_dot^2 + 0.001 u^2). Resets draw theta uniform
// in [-pi, pi] and theta_dot in [-1, 1].
class PendulumEnv final : public Env {
 public:
  explicit PendulumEnv(PendulumSpec spec);

  std::vector<double> reset(Rng& rng) override;
  StepResult step(std::span<const double> action) override;
  int obs_dim() const override { return 3; }
  int action_dim() const override { return 1; }
  ActionBounds action_bounds() const override;
  int episode_length() const override { return spec_.episode_length; }
  std::unique_ptr<Env> clone_fresh() const override;

  const PendulumSpec& spec() const { return spec_; }
  // Test hook: place the pendulum at an exact state.
  void set_state(double theta, double theta_dot);
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }
  // Rigid-rod mechanical energy; conserved by the dynamics at zero torque.
  double energy() const;

 private:
  std::vector<double> observe() const;

  PendulumSpec spec_;
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
  int t_ = 0;
  bool done_ = true;
};

}  // namespace gradcaps
