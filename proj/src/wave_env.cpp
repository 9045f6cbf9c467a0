#include "gradcaps/wave_env.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gradcaps/errors.hpp"

namespace gradcaps {

void WaveSpec::validate() const {
  if (period < 2) throw ConfigError("wave: period must be >= 2");
  if (episode_length < period)
    throw ConfigError("wave: episode_length must be >= period");
  if (amplitude <= 0.0) throw ConfigError("wave: amplitude must be > 0");
  if (!(action_low < action_high)) throw ConfigError("wave: bad action bounds");
}

double waveform_value(const WaveSpec& spec, int t) {
  if (t < 0) throw std::invalid_argument("waveform_value: t must be >= 0");
  if (spec.kind == WaveSpec::Kind::Square)
    return (t % spec.period) * 2 < spec.period ? spec.amplitude : -spec.amplitude;
  return spec.amplitude *
         std::cos(2.0 * std::numbers::pi * static_cast<double>(t) /
                  static_cast<double>(spec.period));
}

WaveEnv::WaveEnv(WaveSpec spec) : spec_(spec) { spec_.validate(); }

std::vector<double> WaveEnv::reset(Rng&) {
  t_ = 0;
  pos_ = waveform_value(spec_, 0);
  done_ = false;
  return {0.0, pos_};
}

StepResult WaveEnv::step(std::span<const double> action) {
  if (done_) throw std::logic_error("WaveEnv::step after done");
  if (action.size() != 1) throw std::invalid_argument("WaveEnv::step: action dim != 1");
  double a = action[0];
  a = a < spec_.action_low ? spec_.action_low
                           : (a > spec_.action_high ? spec_.action_high : a);
  const double target_next = waveform_value(spec_, t_ + 1);
  const double reward = -std::fabs(a - target_next);
  pos_ = a;
  ++t_;
  done_ = t_ >= spec_.episode_length;
  return StepResult{{std::fabs(pos_ - target_next), pos_}, reward, done_};
}

ActionBounds WaveEnv::action_bounds() const {
  return ActionBounds{{spec_.action_low}, {spec_.action_high}};
}

std::unique_ptr<Env> WaveEnv::clone_fresh() const {
  return std::make_unique<WaveEnv>(spec_);
}

}  // namespace gradcaps
