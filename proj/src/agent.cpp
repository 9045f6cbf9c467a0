#include "gradcaps/agent.hpp"

#include <cmath>
#include <stdexcept>

#include "gradcaps/errors.hpp"

namespace gradcaps {

const char* to_string(Algorithm a) { return a == Algorithm::Sac ? "sac" : "td3"; }

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "sac") return Algorithm::Sac;
  if (s == "td3") return Algorithm::Td3;
  throw ConfigError("unknown algorithm: " + s);
}

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("agent: gamma must be in (0,1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("agent: tau must be in (0,1]");
  if (lr <= 0.0) throw ConfigError("agent: lr must be > 0");
  if (batch_size < 1) throw ConfigError("agent: batch_size must be >= 1");
  if (hidden.empty()) throw ConfigError("agent: need at least one hidden layer");
  for (int h : hidden)
    if (h < 1) throw ConfigError("agent: hidden sizes must be >= 1");
  if (policy_delay < 1) throw ConfigError("agent: policy_delay must be >= 1");
  if (target_noise < 0.0 || target_noise_clip < 0.0 || exploration_noise < 0.0)
    throw ConfigError("agent: noise parameters must be >= 0");
  if (!entropy_auto && alpha < 0.0) throw ConfigError("agent: alpha must be >= 0");
  regularizer.validate();
}

std::vector<double> PolicySnapshot::act(std::span<const double> obs) const {
  Tensor2 x(1, static_cast<int>(obs.size()));
  for (size_t i = 0; i < obs.size(); ++i) x.at(0, static_cast<int>(i)) = obs[i];
  Tensor2 out = net.forward(x);
  Tensor2 pre = stochastic ? gaussian_head(out).mean : std::move(out);
  return squash_to_bounds(pre, bounds).raw();
}

Agent::Agent(const AgentConfig& cfg, int obs_dim, ActionBounds bounds, Rng init_rng)
    : cfg_(cfg), obs_dim_(obs_dim), bounds_(std::move(bounds)) {
  cfg_.validate();
  bounds_.validate();
  const int act_dim = bounds_.dim();

  twin_ = !(cfg_.algorithm == Algorithm::Td3 && cfg_.ddpg_mode);
  effective_delay_ = cfg_.algorithm == Algorithm::Td3 && cfg_.ddpg_mode ? 1
                                                                        : cfg_.policy_delay;
  effective_target_noise_ =
      cfg_.algorithm == Algorithm::Td3 && cfg_.ddpg_mode ? 0.0 : cfg_.target_noise;

  if (cfg_.algorithm == Algorithm::Sac) {
    gauss_.emplace(obs_dim_, cfg_.hidden, bounds_, init_rng);
  } else {
    det_.emplace(obs_dim_, cfg_.hidden, bounds_, init_rng);
    det_target_ = det_;
  }

  std::vector<int> qs{obs_dim_ + act_dim};
  qs.insert(qs.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  qs.push_back(1);
  q1_ = DenseNet::make(qs, Activation::Relu, Activation::Identity, init_rng);
  q2_ = DenseNet::make(qs, Activation::Relu, Activation::Identity, init_rng);
  q1_target_ = q1_;
  q2_target_ = q2_;

  actor_opt_ = Adam(AdamConfig{.lr = cfg_.lr});
  critic_opt_ = Adam(AdamConfig{.lr = cfg_.lr});
  alpha_opt_ = Adam(AdamConfig{.lr = cfg_.lr});
  log_alpha_ = Tensor2(1, 1);
  if (cfg_.entropy_auto) {
    alpha_ = 1.0;  // exp(0)
  } else {
    alpha_ = cfg_.alpha;
  }
  target_entropy_ = -static_cast<double>(act_dim);
}

const DenseNet& Agent::actor_net() const {
  return cfg_.algorithm == Algorithm::Sac ? gauss_->net() : det_->net();
}

std::vector<double> Agent::act_deterministic(std::span<const double> obs) const {
  return cfg_.algorithm == Algorithm::Sac ? gauss_->act_deterministic(obs)
                                          : det_->act(obs);
}

std::vector<double> Agent::act_explore(std::span<const double> obs,
                                       Rng& explore_rng) const {
  if (cfg_.algorithm == Algorithm::Sac) return gauss_->act_stochastic(obs, explore_rng);
  std::vector<double> a = det_->act(obs);
  for (int j = 0; j < bounds_.dim(); ++j) {
    a[j] += cfg_.exploration_noise * bounds_.halfspan(j) * explore_rng.gaussian();
    a[j] = a[j] < bounds_.lo[j] ? bounds_.lo[j]
                                : (a[j] > bounds_.hi[j] ? bounds_.hi[j] : a[j]);
  }
  return a;
}

PolicySnapshot Agent::snapshot_policy() const {
  PolicySnapshot s;
  s.stochastic = cfg_.algorithm == Algorithm::Sac;
  s.net = actor_net();
  s.bounds = bounds_;
  return s;
}

Var Agent::det_action_on_tape(Tape& tape, Var obs,
                              const DenseNet::Params& params) const {
  return cfg_.algorithm == Algorithm::Sac
             ? gauss_->deterministic_on_tape(tape, obs, params)
             : det_->act_on_tape(tape, obs, params);
}

namespace {

// Row-wise L2 norm, [m,n] -> [m,1].
Var row_norm(Tape& tape, Var v) { return tape.sqrt(tape.sum_cols(tape.square(v))); }

std::vector<const Tensor2*> collect_grads(const Tape& tape,
                                          const DenseNet::Params& params,
                                          std::vector<Tensor2>& storage) {
  std::vector<const Tensor2*> out;
  for (size_t k = 0; k < params.w.size(); ++k) {
    storage.push_back(tape.grad(params.w[k]));
    storage.push_back(tape.grad(params.b[k]));
  }
  for (const auto& t : storage) out.push_back(&t);
  return out;
}

}  // namespace

Agent::ActorLossParts Agent::add_regularizer(Tape& tape, Var vanilla,
                                             const TripleBatch& batch, Var s_var,
                                             const DenseNet::Params& actor_params,
                                             const RegularizerSpec& spec,
                                             Rng& reg_rng) const {
  ActorLossParts parts{vanilla};
  const bool temporal_active = spec.kind != RegKind::None && spec.lambda_t > 0.0;
  const bool spatial_active = spec.kind != RegKind::None && spec.lambda_s > 0.0;
  if (!temporal_active && !spatial_active) return parts;

  if (temporal_active) {
    Var term;
    if (spec.kind == RegKind::Caps) {
      Var a_t = det_action_on_tape(tape, s_var, actor_params);
      Var a_n = det_action_on_tape(tape, tape.leaf(batch.s_next), actor_params);
      term = tape.mean_all(row_norm(tape, tape.sub(a_t, a_n)));
    } else {
      Var a_p = det_action_on_tape(tape, tape.leaf(batch.s_prev), actor_params);
      Var a_t = det_action_on_tape(tape, s_var, actor_params);
      Var a_n = det_action_on_tape(tape, tape.leaf(batch.s_next), actor_params);
      Var diff = tape.sub(tape.sub(a_t, a_p), tape.sub(a_n, a_t));
      Var raw = row_norm(tape, diff);
      if (spec.kind == RegKind::GradCapsRaw) {
        term = tape.mean_all(raw);
      } else {
        Var delta = tape.sub(a_n, a_p);
        Var inv = tape.recip(tape.add_scalar(tape.abs(delta), spec.epsilon));
        Var weight = tape.tanh(row_norm(tape, inv));
        term = tape.mean_all(tape.mul(raw, weight));
      }
    }
    parts.temporal_value = tape.value(term).at(0, 0);
    parts.total = tape.add(parts.total, tape.scale(term, spec.lambda_t));
  }

  if (spatial_active) {
    Tensor2 noisy = batch.s;
    for (auto& v : noisy.raw()) v += spec.spatial_sigma * reg_rng.gaussian();
    Var a_s = det_action_on_tape(tape, s_var, actor_params);
    Var a_n = det_action_on_tape(tape, tape.leaf(noisy), actor_params);
    Var term = tape.mean_all(row_norm(tape, tape.sub(a_s, a_n)));
    parts.spatial_value = tape.value(term).at(0, 0);
    parts.total = tape.add(parts.total, tape.scale(term, spec.lambda_s));
  }
  return parts;
}

UpdateDiag Agent::update(const TripleBatch& batch, Rng& update_rng, Rng& reg_rng) {
  if (batch.size() < 1) throw std::invalid_argument("Agent::update: empty batch");
  UpdateDiag diag = cfg_.algorithm == Algorithm::Sac
                        ? update_sac(batch, update_rng, reg_rng)
                        : update_td3(batch, update_rng, reg_rng);
  ++update_count_;
  if (!std::isfinite(diag.critic_loss) ||
      (diag.actor_updated && !std::isfinite(diag.actor_loss)))
    throw RuntimeAbort("Agent::update produced a non-finite loss");
  return diag;
}

UpdateDiag Agent::update_sac(const TripleBatch& batch, Rng& update_rng, Rng& reg_rng) {
  UpdateDiag diag;
  const int B = batch.size();

  // Critic targets: y = r + gamma (1-done) (min Q'(s', a') - alpha log pi(a'|s')).
  GaussianPolicy::PlainSample next = gauss_->sample_batch(batch.s_next, update_rng);
  Tensor2 qin_next(B, obs_dim_ + bounds_.dim());
  for (int i = 0; i < B; ++i) {
    for (int j = 0; j < obs_dim_; ++j) qin_next.at(i, j) = batch.s_next.at(i, j);
    for (int j = 0; j < bounds_.dim(); ++j)
      qin_next.at(i, obs_dim_ + j) = next.action.at(i, j);
  }
  const Tensor2 q1n = q1_target_.forward(qin_next);
  const Tensor2 q2n = q2_target_.forward(qin_next);
  Tensor2 y(B, 1);
  double y_mean = 0.0;
  for (int i = 0; i < B; ++i) {
    const double qmin = std::min(q1n.at(i, 0), q2n.at(i, 0));
    y.at(i, 0) = batch.r.at(i, 0) +
                 cfg_.gamma * (1.0 - batch.done.at(i, 0)) *
                     (qmin - alpha_ * next.log_prob.at(i, 0));
    y_mean += y.at(i, 0);
  }
  diag.q_target_mean = y_mean / B;

  // Critic step.
  {
    Tape tape;
    DenseNet::Params p1 = q1_.push_params(tape);
    DenseNet::Params p2 = q2_.push_params(tape);
    Var qin = tape.concat_cols(tape.leaf(batch.s), tape.leaf(batch.a));
    Var target = tape.leaf(y);
    Var e1 = tape.sub(q1_.forward(tape, qin, p1), target);
    Var e2 = tape.sub(q2_.forward(tape, qin, p2), target);
    Var loss = tape.add(tape.mean_all(tape.square(e1)), tape.mean_all(tape.square(e2)));
    diag.critic_loss = tape.value(loss).at(0, 0);
    tape.backward(loss);
    std::vector<Tensor2> gs;
    std::vector<const Tensor2*> g1 = collect_grads(tape, p1, gs);
    std::vector<Tensor2> gs2;
    std::vector<const Tensor2*> g2 = collect_grads(tape, p2, gs2);
    std::vector<Tensor2*> params = q1_.param_ptrs();
    std::vector<Tensor2*> params2 = q2_.param_ptrs();
    params.insert(params.end(), params2.begin(), params2.end());
    std::vector<const Tensor2*> grads = g1;
    grads.insert(grads.end(), g2.begin(), g2.end());
    critic_opt_.step(params, grads);
  }

  // Actor step: minimize alpha log pi - min Q plus regularizers.
  double log_prob_mean = 0.0;
  {
    Tape tape;
    DenseNet::Params ap = gauss_->net().push_params(tape);
    DenseNet::Params c1 = q1_.push_params(tape, /*trainable=*/false);
    DenseNet::Params c2 = q2_.push_params(tape, /*trainable=*/false);
    Var s_var = tape.leaf(batch.s);
    Tensor2 noise(B, bounds_.dim());
    for (auto& v : noise.raw()) v = update_rng.gaussian();
    GaussianPolicy::Sample sample =
        gauss_->sample_on_tape(tape, s_var, tape.leaf(noise), ap);
    Var qin = tape.concat_cols(s_var, sample.action);
    Var qmin = tape.min_elem(q1_.forward(tape, qin, c1), q2_.forward(tape, qin, c2));
    Var vanilla =
        tape.mean_all(tape.sub(tape.scale(sample.log_prob, alpha_), qmin));
    ActorLossParts parts =
        add_regularizer(tape, vanilla, batch, s_var, ap, cfg_.regularizer, reg_rng);
    diag.actor_loss = tape.value(parts.total).at(0, 0);
    diag.temporal_loss = parts.temporal_value;
    diag.spatial_loss = parts.spatial_value;
    diag.actor_updated = true;
    tape.backward(parts.total);
    std::vector<Tensor2> gs;
    std::vector<const Tensor2*> grads = collect_grads(tape, ap, gs);
    actor_opt_.step(gauss_->net().param_ptrs(), grads);

    const Tensor2& lp = tape.value(sample.log_prob);
    for (int i = 0; i < B; ++i) log_prob_mean += lp.at(i, 0);
    log_prob_mean /= B;
  }

  // Temperature step towards target entropy.
  if (cfg_.entropy_auto) {
    Tensor2 grad(1, 1);
    grad.at(0, 0) = -(log_prob_mean + target_entropy_);
    std::vector<Tensor2*> p{&log_alpha_};
    std::vector<const Tensor2*> g{&grad};
    alpha_opt_.step(p, g);
    alpha_ = std::exp(log_alpha_.at(0, 0));
  }
  diag.alpha = alpha_;

  q1_target_.soft_update_from(q1_, cfg_.tau);
  q2_target_.soft_update_from(q2_, cfg_.tau);
  return diag;
}

Tensor2 Agent::td3_target_actions(const TripleBatch& batch, Rng& update_rng) const {
  Tensor2 a_next = det_target_->act_batch(batch.s_next);
  if (effective_target_noise_ > 0.0) {
    for (int i = 0; i < a_next.rows(); ++i)
      for (int j = 0; j < bounds_.dim(); ++j) {
        const double span = bounds_.halfspan(j);
        double nu = effective_target_noise_ * span * update_rng.gaussian();
        const double clip = cfg_.target_noise_clip * span;
        nu = nu < -clip ? -clip : (nu > clip ? clip : nu);
        double v = a_next.at(i, j) + nu;
        v = v < bounds_.lo[j] ? bounds_.lo[j] : (v > bounds_.hi[j] ? bounds_.hi[j] : v);
        a_next.at(i, j) = v;
      }
  }
  return a_next;
}

UpdateDiag Agent::update_td3(const TripleBatch& batch, Rng& update_rng, Rng& reg_rng) {
  UpdateDiag diag;
  diag.alpha = 0.0;
  const int B = batch.size();

  const Tensor2 a_next = td3_target_actions(batch, update_rng);
  Tensor2 qin_next(B, obs_dim_ + bounds_.dim());
  for (int i = 0; i < B; ++i) {
    for (int j = 0; j < obs_dim_; ++j) qin_next.at(i, j) = batch.s_next.at(i, j);
    for (int j = 0; j < bounds_.dim(); ++j) qin_next.at(i, obs_dim_ + j) = a_next.at(i, j);
  }
  const Tensor2 q1n = q1_target_.forward(qin_next);
  const Tensor2 q2n = twin_ ? q2_target_.forward(qin_next) : Tensor2();
  Tensor2 y(B, 1);
  double y_mean = 0.0;
  for (int i = 0; i < B; ++i) {
    const double qv = twin_ ? std::min(q1n.at(i, 0), q2n.at(i, 0)) : q1n.at(i, 0);
    y.at(i, 0) = batch.r.at(i, 0) + cfg_.gamma * (1.0 - batch.done.at(i, 0)) * qv;
    y_mean += y.at(i, 0);
  }
  diag.q_target_mean = y_mean / B;

  {
    Tape tape;
    DenseNet::Params p1 = q1_.push_params(tape);
    DenseNet::Params p2 = twin_ ? q2_.push_params(tape) : DenseNet::Params{};
    Var qin = tape.concat_cols(tape.leaf(batch.s), tape.leaf(batch.a));
    Var target = tape.leaf(y);
    Var loss = tape.mean_all(tape.square(tape.sub(q1_.forward(tape, qin, p1), target)));
    if (twin_)
      loss = tape.add(
          loss, tape.mean_all(tape.square(tape.sub(q2_.forward(tape, qin, p2), target))));
    diag.critic_loss = tape.value(loss).at(0, 0);
    tape.backward(loss);
    std::vector<Tensor2> gs;
    std::vector<const Tensor2*> grads = collect_grads(tape, p1, gs);
    std::vector<Tensor2*> params = q1_.param_ptrs();
    std::vector<Tensor2> gs2;
    if (twin_) {
      std::vector<const Tensor2*> g2 = collect_grads(tape, p2, gs2);
      grads.insert(grads.end(), g2.begin(), g2.end());
      std::vector<Tensor2*> p2v = q2_.param_ptrs();
      params.insert(params.end(), p2v.begin(), p2v.end());
    }
    critic_opt_.step(params, grads);
  }

  diag.actor_updated = (update_count_ + 1) % effective_delay_ == 0;
  if (diag.actor_updated) {
    Tape tape;
    DenseNet::Params ap = det_->net().push_params(tape);
    DenseNet::Params c1 = q1_.push_params(tape, /*trainable=*/false);
    Var s_var = tape.leaf(batch.s);
    Var action = det_->act_on_tape(tape, s_var, ap);
    Var q = q1_.forward(tape, tape.concat_cols(s_var, action), c1);
    Var vanilla = tape.scale(tape.mean_all(q), -1.0);
    ActorLossParts parts =
        add_regularizer(tape, vanilla, batch, s_var, ap, cfg_.regularizer, reg_rng);
    diag.actor_loss = tape.value(parts.total).at(0, 0);
    diag.temporal_loss = parts.temporal_value;
    diag.spatial_loss = parts.spatial_value;
    tape.backward(parts.total);
    std::vector<Tensor2> gs;
    std::vector<const Tensor2*> grads = collect_grads(tape, ap, gs);
    actor_opt_.step(det_->net().param_ptrs(), grads);

    det_target_->net().soft_update_from(det_->net(), cfg_.tau);
    q1_target_.soft_update_from(q1_, cfg_.tau);
    if (twin_) q2_target_.soft_update_from(q2_, cfg_.tau);
  }
  return diag;
}

double Agent::actor_loss_value(const TripleBatch& batch, Rng update_rng, Rng reg_rng,
                               const RegularizerSpec& spec) const {
  Tape tape;
  Var s_var = tape.leaf(batch.s);
  Var vanilla;
  DenseNet::Params ap;
  if (cfg_.algorithm == Algorithm::Sac) {
    ap = gauss_->net().push_params(tape);
    DenseNet::Params c1 = q1_.push_params(tape, false);
    DenseNet::Params c2 = q2_.push_params(tape, false);
    Tensor2 noise(batch.size(), bounds_.dim());
    for (auto& v : noise.raw()) v = update_rng.gaussian();
    GaussianPolicy::Sample sample =
        gauss_->sample_on_tape(tape, s_var, tape.leaf(noise), ap);
    Var qin = tape.concat_cols(s_var, sample.action);
    Var qmin = tape.min_elem(q1_.forward(tape, qin, c1), q2_.forward(tape, qin, c2));
    vanilla = tape.mean_all(tape.sub(tape.scale(sample.log_prob, alpha_), qmin));
  } else {
    ap = det_->net().push_params(tape);
    DenseNet::Params c1 = q1_.push_params(tape, false);
    Var action = det_->act_on_tape(tape, s_var, ap);
    Var q = q1_.forward(tape, tape.concat_cols(s_var, action), c1);
    vanilla = tape.scale(tape.mean_all(q), -1.0);
  }
  ActorLossParts parts = add_regularizer(tape, vanilla, batch, s_var, ap, spec, reg_rng);
  return tape.value(parts.total).at(0, 0);
}

}  // namespace gradcaps
