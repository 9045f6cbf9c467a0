#pragma once

#include <span>
#include <string>
#include <vector>

namespace gradcaps {

// Which temporal smoothness penalty the actor objective carries.
enum class RegKind { None, Caps, GradCapsRaw, GradCapsNorm };

// How per-step losses are combined over a sequence. Training uses the batch
// mean; the sequence oracles use sqrt of the summed squares.
enum class Aggregation { Mean, SqrtSumSq };

struct RegularizerSpec {
  RegKind kind = RegKind::None;
  double lambda_t = 1.0;
  double lambda_s = 0.0;
  double epsilon = 1e-3;       // guard added to |displacement| components
  double spatial_sigma = 0.05; // std of state perturbation for the spatial term
  Aggregation aggregation = Aggregation::Mean;

  // Throws ConfigError on: epsilon <= 0, negative weights, or
  // lambda_s > 0 with spatial_sigma <= 0.
  void validate() const;
};

const char* to_string(RegKind kind);
const char* to_string(Aggregation agg);
RegKind reg_kind_from_string(const std::string& s);
Aggregation aggregation_from_string(const std::string& s);

// ||a - b||_2 over two equal-dimension action vectors.
double caps_temporal_loss(std::span<const double> a, std::span<const double> a_next);

// Distance between the deterministic policy outputs at a state and at its
// perturbed copy; callers draw the perturbation themselves.
double caps_spatial_loss(std::span<const double> action_at_s,
                         std::span<const double> action_at_s_noisy);

// ||(a - a_prev) - (a_next - a)||_2, the difference of consecutive action
// changes around the middle point.
double gradcaps_raw_loss(std::span<const double> a_prev, std::span<const double> a,
                         std::span<const double> a_next);

// Raw loss scaled by tanh(|| 1/(|delta|+eps) ||_2) with delta = a_next - a_prev.
// Strictly below the raw loss whenever the raw loss is positive.
double gradcaps_normalized_loss(std::span<const double> a_prev, std::span<const double> a,
                                std::span<const double> a_next, double epsilon);

// Diagnostic form: || ((a-a_prev)-(a_next-a)) / (delta + eps) ||_2 with the
// signed displacement in the denominator. epsilon may be zero here; a zero
// denominator component then yields an infinite loss.
double gradcaps_division_loss(std::span<const double> a_prev, std::span<const double> a,
                              std::span<const double> a_next, double epsilon);

// Sequence-level loss over scalar-per-step or vector actions.
// caps needs length >= 2, gradcaps kinds length >= 3; shorter input throws.
enum class SequenceLossKind { Caps, GradCapsRaw, GradCapsDiv, GradCapsTanh };

double sequence_loss(std::span<const std::vector<double>> actions, SequenceLossKind kind,
                     Aggregation aggregation, double epsilon = 0.0);
double sequence_loss(std::span<const double> scalar_actions, SequenceLossKind kind,
                     Aggregation aggregation, double epsilon = 0.0);

// Empirical Lipschitz constant of a trace: max over steps of the step
// quantity (order 1: action change; order 2: change of action change).
double estimate_lipschitz(std::span<const std::vector<double>> actions, int order);
double estimate_lipschitz(std::span<const double> scalar_actions, int order);

}  // namespace gradcaps
