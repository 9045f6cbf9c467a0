#include "gradcaps/pendulum_env.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gradcaps/errors.hpp"

namespace gradcaps {

namespace {
constexpr double kPi = std::numbers::pi;

double wrap_angle(double theta) {
  double x = std::fmod(theta + kPi, 2.0 * kPi);
  if (x < 0.0) x += 2.0 * kPi;
  return x - kPi;
}
}  // namespace

void PendulumSpec::validate() const {
  if (mass <= 0.0 || length <= 0.0 || gravity <= 0.0 || dt <= 0.0 ||
      max_torque <= 0.0 || max_speed <= 0.0)
    throw ConfigError("pendulum: physical constants must be > 0");
  if (episode_length < 1) throw ConfigError("pendulum: episode_length must be >= 1");
}

PendulumEnv::PendulumEnv(PendulumSpec spec) : spec_(spec) { spec_.validate(); }

std::vector<double> PendulumEnv::reset(Rng& rng) {
  theta_ = rng.uniform(-kPi, kPi);
  theta_dot_ = rng.uniform(-1.0, 1.0);
  t_ = 0;
  done_ = false;
  return observe();
}

void PendulumEnv::set_state(double theta, double theta_dot) {
  theta_ = theta;
  theta_dot_ = theta_dot;
  t_ = 0;
  done_ = false;
}

std::vector<double> PendulumEnv::observe() const {
  return {std::cos(theta_), std::sin(theta_), theta_dot_};
}

StepResult PendulumEnv::step(std::span<const double> action) {
  if (done_) throw std::logic_error("PendulumEnv::step after done");
  if (action.size() != 1)
    throw std::invalid_argument("PendulumEnv::step: action dim != 1");
  double u = action[0];
  u = u < -spec_.max_torque ? -spec_.max_torque
                            : (u > spec_.max_torque ? spec_.max_torque : u);

  const double th_norm = wrap_angle(theta_);
  const double reward =
      -(th_norm * th_norm + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u);

  const double g = spec_.gravity, m = spec_.mass, l = spec_.length;
  const double acc = 1.5 * g / l * std::sin(theta_) + 3.0 / (m * l * l) * u;
  theta_dot_ += acc * spec_.dt;
  theta_dot_ = theta_dot_ < -spec_.max_speed
                   ? -spec_.max_speed
                   : (theta_dot_ > spec_.max_speed ? spec_.max_speed : theta_dot_);
  theta_ += theta_dot_ * spec_.dt;

  ++t_;
  done_ = t_ >= spec_.episode_length;
  return StepResult{observe(), reward, done_};
}

double PendulumEnv::energy() const {
  const double m = spec_.mass, l = spec_.length, g = spec_.gravity;
  // Uniform rod pivoted at one end: I = m l^2 / 3, center of mass at l/2,
  // potential highest at theta = 0 (upright).
  return (m * l * l / 6.0) * theta_dot_ * theta_dot_ +
         (m * g * l / 2.0) * std::cos(theta_);
}

ActionBounds PendulumEnv::action_bounds() const {
  return ActionBounds{{-spec_.max_torque}, {spec_.max_torque}};
}

std::unique_ptr<Env> PendulumEnv::clone_fresh() const {
  return std::make_unique<PendulumEnv>(spec_);
}

}  // namespace gradcaps
