#include "gradcaps/checkpoint.hpp"

#include <json.hpp>

#include "gradcaps/errors.hpp"
#include "gradcaps/util.hpp"

namespace gradcaps {

namespace {

using nlohmann::json;

json tensor_to_json(const Tensor2& t) {
  json j;
  j["rows"] = t.rows();
  j["cols"] = t.cols();
  j["data"] = t.raw();
  return j;
}

Tensor2 tensor_from_json(const json& j) {
  Tensor2 t(j.at("rows").get<int>(), j.at("cols").get<int>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != t.size()) throw ConfigError("checkpoint: tensor size mismatch");
  t.raw() = data;
  return t;
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "?";
}

Activation activation_from(const std::string& s) {
  if (s == "identity") return Activation::Identity;
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw ConfigError("checkpoint: unknown activation " + s);
}

json env_to_json(const EnvSpec& env) {
  json j;
  if (env.type == EnvSpec::Type::Wave) {
    j["type"] = "wave";
    j["wave"] = env.wave.kind == WaveSpec::Kind::Square ? "square" : "cosine";
    j["amplitude"] = env.wave.amplitude;
    j["period"] = env.wave.period;
    j["episode_length"] = env.wave.episode_length;
    j["action_low"] = env.wave.action_low;
    j["action_high"] = env.wave.action_high;
  } else {
    j["type"] = "pendulum";
    j["mass"] = env.pendulum.mass;
    j["length"] = env.pendulum.length;
    j["gravity"] = env.pendulum.gravity;
    j["dt"] = env.pendulum.dt;
    j["max_torque"] = env.pendulum.max_torque;
    j["max_speed"] = env.pendulum.max_speed;
    j["episode_length"] = env.pendulum.episode_length;
  }
  return j;
}

EnvSpec env_from_json(const json& j) {
  EnvSpec env;
  const std::string type = j.at("type").get<std::string>();
  if (type == "wave") {
    env.type = EnvSpec::Type::Wave;
    env.wave.kind = j.at("wave").get<std::string>() == "square" ? WaveSpec::Kind::Square
                                                                : WaveSpec::Kind::Cosine;
    env.wave.amplitude = j.at("amplitude").get<double>();
    env.wave.period = j.at("period").get<int>();
    env.wave.episode_length = j.at("episode_length").get<int>();
    env.wave.action_low = j.at("action_low").get<double>();
    env.wave.action_high = j.at("action_high").get<double>();
  } else if (type == "pendulum") {
    env.type = EnvSpec::Type::Pendulum;
    env.pendulum.mass = j.at("mass").get<double>();
    env.pendulum.length = j.at("length").get<double>();
    env.pendulum.gravity = j.at("gravity").get<double>();
    env.pendulum.dt = j.at("dt").get<double>();
    env.pendulum.max_torque = j.at("max_torque").get<double>();
    env.pendulum.max_speed = j.at("max_speed").get<double>();
    env.pendulum.episode_length = j.at("episode_length").get<int>();
  } else {
    throw ConfigError("checkpoint: unknown env type " + type);
  }
  env.validate();
  return env;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json j;
  j["version"] = ckpt.version;
  j["kind"] = "policy";
  j["config_hash"] = ckpt.config_hash;
  j["seed"] = ckpt.seed;
  j["best_return"] = ckpt.best_return;
  j["env"] = env_to_json(ckpt.env);
  json actor;
  actor["stochastic"] = ckpt.policy.stochastic;
  actor["sizes"] = ckpt.policy.net.sizes();
  actor["hidden_activation"] = activation_name(ckpt.policy.net.hidden_activation());
  actor["output_activation"] = activation_name(ckpt.policy.net.output_activation());
  json weights = json::array();
  json biases = json::array();
  for (int k = 0; k < ckpt.policy.net.layers(); ++k) {
    weights.push_back(tensor_to_json(ckpt.policy.net.weight(k)));
    biases.push_back(tensor_to_json(ckpt.policy.net.bias(k)));
  }
  actor["weights"] = weights;
  actor["biases"] = biases;
  actor["bounds_lo"] = ckpt.policy.bounds.lo;
  actor["bounds_hi"] = ckpt.policy.bounds.hi;
  j["actor"] = actor;
  write_file_atomic(path, j.dump(1));
}

Checkpoint load_checkpoint(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("checkpoint: parse error: ") + e.what());
  }
  Checkpoint ckpt;
  ckpt.version = j.at("version").get<int>();
  if (ckpt.version != 1) throw ConfigError("checkpoint: unsupported version");
  if (j.at("kind").get<std::string>() != "policy")
    throw ConfigError("checkpoint: not a policy checkpoint");
  ckpt.config_hash = j.at("config_hash").get<std::string>();
  ckpt.seed = j.at("seed").get<uint64_t>();
  ckpt.best_return = j.at("best_return").get<double>();
  ckpt.env = env_from_json(j.at("env"));

  const json& actor = j.at("actor");
  ckpt.policy.stochastic = actor.at("stochastic").get<bool>();
  ckpt.policy.bounds.lo = actor.at("bounds_lo").get<std::vector<double>>();
  ckpt.policy.bounds.hi = actor.at("bounds_hi").get<std::vector<double>>();
  ckpt.policy.bounds.validate();

  const auto sizes = actor.at("sizes").get<std::vector<int>>();
  Rng dummy(0);
  ckpt.policy.net =
      DenseNet::make(sizes, activation_from(actor.at("hidden_activation").get<std::string>()),
                     activation_from(actor.at("output_activation").get<std::string>()), dummy);
  const json& weights = actor.at("weights");
  const json& biases = actor.at("biases");
  if (static_cast<int>(weights.size()) != ckpt.policy.net.layers() ||
      static_cast<int>(biases.size()) != ckpt.policy.net.layers())
    throw ConfigError("checkpoint: layer count mismatch");
  for (int k = 0; k < ckpt.policy.net.layers(); ++k) {
    Tensor2 w = tensor_from_json(weights[k]);
    Tensor2 b = tensor_from_json(biases[k]);
    if (!w.same_shape(ckpt.policy.net.weight(k)) ||
        !b.same_shape(ckpt.policy.net.bias(k)))
      throw ConfigError("checkpoint: parameter shape mismatch");
    ckpt.policy.net.weight(k) = std::move(w);
    ckpt.policy.net.bias(k) = std::move(b);
  }
  return ckpt;
}

}  // namespace gradcaps
