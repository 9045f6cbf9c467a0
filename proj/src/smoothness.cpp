#include "gradcaps/smoothness.hpp"

#include <cmath>
#include <stdexcept>

#include "gradcaps/errors.hpp"

namespace gradcaps {

void RegularizerSpec::validate() const {
  if (epsilon <= 0.0) throw ConfigError("regularizer: epsilon must be > 0");
  if (lambda_t < 0.0 || lambda_s < 0.0)
    throw ConfigError("regularizer: lambda weights must be >= 0");
  if (lambda_s > 0.0 && spatial_sigma <= 0.0)
    throw ConfigError("regularizer: lambda_s > 0 requires spatial_sigma > 0");
}

const char* to_string(RegKind kind) {
  switch (kind) {
    case RegKind::None: return "none";
    case RegKind::Caps: return "caps";
    case RegKind::GradCapsRaw: return "gradcaps_raw";
    case RegKind::GradCapsNorm: return "gradcaps_norm";
  }
  return "?";
}

const char* to_string(Aggregation agg) {
  return agg == Aggregation::Mean ? "mean" : "sqrt_sum_sq";
}

RegKind reg_kind_from_string(const std::string& s) {
  if (s == "none") return RegKind::None;
  if (s == "caps") return RegKind::Caps;
  if (s == "gradcaps_raw") return RegKind::GradCapsRaw;
  if (s == "gradcaps_norm") return RegKind::GradCapsNorm;
  throw ConfigError("unknown regularizer kind: " + s);
}

Aggregation aggregation_from_string(const std::string& s) {
  if (s == "mean") return Aggregation::Mean;
  if (s == "sqrt_sum_sq") return Aggregation::SqrtSumSq;
  throw ConfigError("unknown aggregation: " + s);
}

namespace {

void check_dims(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("smoothness: action dimension mismatch");
}

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double caps_temporal_loss(std::span<const double> a, std::span<const double> a_next) {
  check_dims(a, a_next);
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - a_next[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double caps_spatial_loss(std::span<const double> action_at_s,
                         std::span<const double> action_at_s_noisy) {
  return caps_temporal_loss(action_at_s, action_at_s_noisy);
}

double gradcaps_raw_loss(std::span<const double> a_prev, std::span<const double> a,
                         std::span<const double> a_next) {
  check_dims(a_prev, a);
  check_dims(a, a_next);
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - a_prev[i]) - (a_next[i] - a[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

double gradcaps_normalized_loss(std::span<const double> a_prev, std::span<const double> a,
                                std::span<const double> a_next, double epsilon) {
  if (epsilon <= 0.0)
    throw std::invalid_argument("gradcaps_normalized_loss: epsilon must be > 0");
  const double raw = gradcaps_raw_loss(a_prev, a, a_next);
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double inv = 1.0 / (std::fabs(a_next[i] - a_prev[i]) + epsilon);
    s += inv * inv;
  }
  return raw * std::tanh(std::sqrt(s));
}

double gradcaps_division_loss(std::span<const double> a_prev, std::span<const double> a,
                              std::span<const double> a_next, double epsilon) {
  check_dims(a_prev, a);
  check_dims(a, a_next);
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double num = (a[i] - a_prev[i]) - (a_next[i] - a[i]);
    const double den = (a_next[i] - a_prev[i]) + epsilon;
    const double q = num / den;
    s += q * q;
  }
  return std::sqrt(s);
}

namespace {

double aggregate(const std::vector<double>& per_step, Aggregation agg) {
  if (agg == Aggregation::Mean) {
    double s = 0.0;
    for (double v : per_step) s += v;
    return s / static_cast<double>(per_step.size());
  }
  double s = 0.0;
  for (double v : per_step) s += v * v;
  return std::sqrt(s);
}

}  // namespace

double sequence_loss(std::span<const std::vector<double>> actions, SequenceLossKind kind,
                     Aggregation aggregation, double epsilon) {
  const size_t need = kind == SequenceLossKind::Caps ? 2 : 3;
  if (actions.size() < need)
    throw std::invalid_argument("sequence_loss: sequence too short");
  std::vector<double> per_step;
  if (kind == SequenceLossKind::Caps) {
    for (size_t t = 0; t + 1 < actions.size(); ++t)
      per_step.push_back(caps_temporal_loss(actions[t], actions[t + 1]));
  } else {
    for (size_t t = 1; t + 1 < actions.size(); ++t) {
      switch (kind) {
        case SequenceLossKind::GradCapsRaw:
          per_step.push_back(gradcaps_raw_loss(actions[t - 1], actions[t], actions[t + 1]));
          break;
        case SequenceLossKind::GradCapsDiv:
          per_step.push_back(
              gradcaps_division_loss(actions[t - 1], actions[t], actions[t + 1], epsilon));
          break;
        case SequenceLossKind::GradCapsTanh:
          per_step.push_back(
              gradcaps_normalized_loss(actions[t - 1], actions[t], actions[t + 1], epsilon));
          break;
        default:
          break;
      }
    }
  }
  return aggregate(per_step, aggregation);
}

double sequence_loss(std::span<const double> scalar_actions, SequenceLossKind kind,
                     Aggregation aggregation, double epsilon) {
  std::vector<std::vector<double>> lifted;
  lifted.reserve(scalar_actions.size());
  for (double v : scalar_actions) lifted.push_back({v});
  return sequence_loss(std::span<const std::vector<double>>(lifted), kind, aggregation,
                       epsilon);
}

double estimate_lipschitz(std::span<const std::vector<double>> actions, int order) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("estimate_lipschitz: order must be 1 or 2");
  const size_t need = order == 1 ? 2 : 3;
  if (actions.size() < need)
    throw std::invalid_argument("estimate_lipschitz: sequence too short");
  double k = 0.0;
  if (order == 1) {
    for (size_t t = 0; t + 1 < actions.size(); ++t)
      k = std::max(k, caps_temporal_loss(actions[t], actions[t + 1]));
  } else {
    for (size_t t = 1; t + 1 < actions.size(); ++t)
      k = std::max(k, gradcaps_raw_loss(actions[t - 1], actions[t], actions[t + 1]));
  }
  return k;
}

double estimate_lipschitz(std::span<const double> scalar_actions, int order) {
  std::vector<std::vector<double>> lifted;
  lifted.reserve(scalar_actions.size());
  for (double v : scalar_actions) lifted.push_back({v});
  return estimate_lipschitz(std::span<const std::vector<double>>(lifted), order);
}

}  // namespace gradcaps
