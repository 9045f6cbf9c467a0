#include "gradcaps/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gradcaps/errors.hpp"
#include "gradcaps/util.hpp"

namespace gradcaps {

// ---------------------------------------------------------------- util ----

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeAbort("cannot write file: " + tmp);
    out << content;
    out.flush();
    if (!out) throw RuntimeAbort("short write: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw RuntimeAbort("cannot rename " + tmp + " -> " + path);
}

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// ---------------------------------------------------- tiny TOML subset ----
//
// Supports what the run configs need: [section] headers, key = value with
// strings, numbers, booleans and flat arrays, and # comments. Nested tables
// and multi-line values are out of scope.

namespace {

struct TomlValue {
  enum class Kind { String, Number, Bool, Array } kind = Kind::String;
  std::string str;
  double num = 0.0;
  bool boolean = false;
  std::vector<TomlValue> array;
};

using TomlTable = std::map<std::string, std::map<std::string, TomlValue>>;

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

TomlValue parse_toml_value(const std::string& raw);

TomlValue parse_toml_array(const std::string& raw) {
  TomlValue v;
  v.kind = TomlValue::Kind::Array;
  const std::string inner = trim(raw.substr(1, raw.size() - 2));
  if (inner.empty()) return v;
  int depth = 0;
  bool in_string = false;
  std::string cur;
  for (char c : inner) {
    if (c == '"') in_string = !in_string;
    if (!in_string) {
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == ',' && depth == 0) {
        v.array.push_back(parse_toml_value(trim(cur)));
        cur.clear();
        continue;
      }
    }
    cur.push_back(c);
  }
  if (!trim(cur).empty()) v.array.push_back(parse_toml_value(trim(cur)));
  return v;
}

TomlValue parse_toml_value(const std::string& raw) {
  TomlValue v;
  if (raw.empty()) throw ConfigError("toml: empty value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      throw ConfigError("toml: unterminated string: " + raw);
    v.kind = TomlValue::Kind::String;
    v.str = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') throw ConfigError("toml: unterminated array: " + raw);
    return parse_toml_array(raw);
  }
  if (raw == "true" || raw == "false") {
    v.kind = TomlValue::Kind::Bool;
    v.boolean = raw == "true";
    return v;
  }
  try {
    size_t used = 0;
    v.num = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    v.kind = TomlValue::Kind::Number;
    return v;
  } catch (const std::exception&) {
    throw ConfigError("toml: cannot parse value: " + raw);
  }
}

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("toml line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      table[section];
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("toml line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("toml line " + std::to_string(lineno) + ": empty key");
    table[section][key] = parse_toml_value(val);
  }
  return table;
}

class TomlReader {
 public:
  explicit TomlReader(TomlTable table) : table_(std::move(table)) {}

  bool has(const std::string& section, const std::string& key) const {
    auto s = table_.find(section);
    return s != table_.end() && s->second.count(key) > 0;
  }
  const TomlValue& get(const std::string& section, const std::string& key) const {
    auto s = table_.find(section);
    if (s == table_.end() || !s->second.count(key))
      throw ConfigError("config: missing key " +
                        (section.empty() ? key : section + "." + key));
    return s->second.at(key);
  }
  std::string str(const std::string& section, const std::string& key) const {
    const TomlValue& v = get(section, key);
    if (v.kind != TomlValue::Kind::String)
      throw ConfigError("config: " + key + " must be a string");
    return v.str;
  }
  double number(const std::string& section, const std::string& key) const {
    const TomlValue& v = get(section, key);
    if (v.kind != TomlValue::Kind::Number)
      throw ConfigError("config: " + key + " must be a number");
    return v.num;
  }
  bool boolean(const std::string& section, const std::string& key) const {
    const TomlValue& v = get(section, key);
    if (v.kind != TomlValue::Kind::Bool)
      throw ConfigError("config: " + key + " must be a boolean");
    return v.boolean;
  }
  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    const TomlValue& v = get(section, key);
    if (v.kind != TomlValue::Kind::Array)
      throw ConfigError("config: " + key + " must be an array");
    std::vector<double> out;
    for (const auto& e : v.array) {
      if (e.kind != TomlValue::Kind::Number)
        throw ConfigError("config: " + key + " must contain numbers");
      out.push_back(e.num);
    }
    return out;
  }

 private:
  TomlTable table_;
};

int to_int(double v, const std::string& what) {
  const int64_t i = static_cast<int64_t>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("config: " + what + " must be an integer");
  return static_cast<int>(i);
}

}  // namespace

// ------------------------------------------------------------- EnvSpec ----

void EnvSpec::validate() const {
  if (type == Type::Wave) wave.validate();
  else pendulum.validate();
}

std::unique_ptr<Env> EnvSpec::make() const {
  if (type == Type::Wave) return std::make_unique<WaveEnv>(wave);
  return std::make_unique<PendulumEnv>(pendulum);
}

// ------------------------------------------------------------ RunConfig ----

void RunConfig::validate() const {
  if (run_id.empty()) throw ConfigError("config: run_id must be non-empty");
  for (char c : run_id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      throw ConfigError("config: run_id may contain [A-Za-z0-9_.-] only");
  if (output_dir.empty()) throw ConfigError("config: output_dir must be non-empty");
  if (seeds.empty()) throw ConfigError("config: need at least one seed");
  if (warmup_steps < 0) throw ConfigError("config: warmup_steps must be >= 0");
  if (total_steps < warmup_steps)
    throw ConfigError("config: total_steps must be >= warmup_steps");
  if (eval_interval < 1) throw ConfigError("config: eval_interval must be >= 1");
  if (eval_episodes < 1) throw ConfigError("config: eval_episodes must be >= 1");
  if (buffer_capacity < 3) throw ConfigError("config: buffer_capacity must be >= 3");
  env.validate();
  agent.validate();
}

namespace {

RunConfig config_from_reader(const TomlReader& r) {
  RunConfig c;
  c.run_id = r.str("", "run_id");
  if (r.has("", "output_dir")) c.output_dir = r.str("", "output_dir");
  if (r.has("", "seeds")) {
    c.seeds.clear();
    for (double v : r.numbers("", "seeds")) {
      if (v < 0 || static_cast<double>(static_cast<uint64_t>(v)) != v)
        throw ConfigError("config: seeds must be non-negative integers");
      c.seeds.push_back(static_cast<uint64_t>(v));
    }
  }
  if (r.has("", "total_steps"))
    c.total_steps = static_cast<int64_t>(r.number("", "total_steps"));
  if (r.has("", "eval_interval"))
    c.eval_interval = to_int(r.number("", "eval_interval"), "eval_interval");
  if (r.has("", "eval_episodes"))
    c.eval_episodes = to_int(r.number("", "eval_episodes"), "eval_episodes");
  if (r.has("", "warmup_steps"))
    c.warmup_steps = to_int(r.number("", "warmup_steps"), "warmup_steps");
  if (r.has("", "buffer_capacity"))
    c.buffer_capacity = static_cast<int64_t>(r.number("", "buffer_capacity"));

  const std::string env_type = r.str("env", "type");
  if (env_type == "wave") {
    c.env.type = EnvSpec::Type::Wave;
    WaveSpec& w = c.env.wave;
    const std::string kind = r.str("env", "wave");
    if (kind == "square") w.kind = WaveSpec::Kind::Square;
    else if (kind == "cosine") w.kind = WaveSpec::Kind::Cosine;
    else throw ConfigError("config: env.wave must be square or cosine");
    if (r.has("env", "amplitude")) w.amplitude = r.number("env", "amplitude");
    if (r.has("env", "period")) w.period = to_int(r.number("env", "period"), "period");
    if (r.has("env", "episode_length"))
      w.episode_length = to_int(r.number("env", "episode_length"), "episode_length");
    if (r.has("env", "action_low")) w.action_low = r.number("env", "action_low");
    if (r.has("env", "action_high")) w.action_high = r.number("env", "action_high");
  } else if (env_type == "pendulum") {
    c.env.type = EnvSpec::Type::Pendulum;
    PendulumSpec& p = c.env.pendulum;
    if (r.has("env", "mass")) p.mass = r.number("env", "mass");
    if (r.has("env", "length")) p.length = r.number("env", "length");
    if (r.has("env", "gravity")) p.gravity = r.number("env", "gravity");
    if (r.has("env", "dt")) p.dt = r.number("env", "dt");
    if (r.has("env", "max_torque")) p.max_torque = r.number("env", "max_torque");
    if (r.has("env", "max_speed")) p.max_speed = r.number("env", "max_speed");
    if (r.has("env", "episode_length"))
      p.episode_length = to_int(r.number("env", "episode_length"), "episode_length");
  } else {
    throw ConfigError("config: env.type must be wave or pendulum");
  }

  AgentConfig& a = c.agent;
  if (r.has("agent", "algorithm"))
    a.algorithm = algorithm_from_string(r.str("agent", "algorithm"));
  if (r.has("agent", "gamma")) a.gamma = r.number("agent", "gamma");
  if (r.has("agent", "tau")) a.tau = r.number("agent", "tau");
  if (r.has("agent", "lr")) a.lr = r.number("agent", "lr");
  if (r.has("agent", "batch_size"))
    a.batch_size = to_int(r.number("agent", "batch_size"), "batch_size");
  if (r.has("agent", "hidden")) {
    a.hidden.clear();
    for (double v : r.numbers("agent", "hidden"))
      a.hidden.push_back(to_int(v, "hidden"));
  }
  if (r.has("agent", "entropy")) {
    const TomlValue& v = r.get("agent", "entropy");
    if (v.kind == TomlValue::Kind::String && v.str == "auto") {
      a.entropy_auto = true;
    } else if (v.kind == TomlValue::Kind::Number) {
      a.entropy_auto = false;
      a.alpha = v.num;
    } else {
      throw ConfigError("config: agent.entropy must be \"auto\" or a number");
    }
  }
  if (r.has("agent", "policy_delay"))
    a.policy_delay = to_int(r.number("agent", "policy_delay"), "policy_delay");
  if (r.has("agent", "target_noise")) a.target_noise = r.number("agent", "target_noise");
  if (r.has("agent", "target_noise_clip"))
    a.target_noise_clip = r.number("agent", "target_noise_clip");
  if (r.has("agent", "exploration_noise"))
    a.exploration_noise = r.number("agent", "exploration_noise");
  if (r.has("agent", "ddpg_mode")) a.ddpg_mode = r.boolean("agent", "ddpg_mode");

  RegularizerSpec& g = a.regularizer;
  if (r.has("regularizer", "kind"))
    g.kind = reg_kind_from_string(r.str("regularizer", "kind"));
  if (r.has("regularizer", "lambda_t")) g.lambda_t = r.number("regularizer", "lambda_t");
  if (r.has("regularizer", "lambda_s")) g.lambda_s = r.number("regularizer", "lambda_s");
  if (r.has("regularizer", "epsilon")) g.epsilon = r.number("regularizer", "epsilon");
  if (r.has("regularizer", "spatial_sigma"))
    g.spatial_sigma = r.number("regularizer", "spatial_sigma");
  if (r.has("regularizer", "aggregation"))
    g.aggregation = aggregation_from_string(r.str("regularizer", "aggregation"));

  c.validate();
  return c;
}

}  // namespace

RunConfig RunConfig::from_toml(const std::string& text) {
  return config_from_reader(TomlReader(parse_toml(text)));
}

RunConfig RunConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("json: ") + e.what());
  }
  // Reuse the TOML path by flattening the JSON object into a table.
  TomlTable table;
  auto put = [&table](const std::string& section, const std::string& key,
                      const nlohmann::json& v) {
    TomlValue tv;
    if (v.is_string()) {
      tv.kind = TomlValue::Kind::String;
      tv.str = v.get<std::string>();
    } else if (v.is_boolean()) {
      tv.kind = TomlValue::Kind::Bool;
      tv.boolean = v.get<bool>();
    } else if (v.is_number()) {
      tv.kind = TomlValue::Kind::Number;
      tv.num = v.get<double>();
    } else if (v.is_array()) {
      tv.kind = TomlValue::Kind::Array;
      for (const auto& e : v) {
        TomlValue ev;
        if (!e.is_number()) throw ConfigError("json: arrays must be numeric");
        ev.kind = TomlValue::Kind::Number;
        ev.num = e.get<double>();
        tv.array.push_back(ev);
      }
    } else {
      throw ConfigError("json: unsupported value for " + key);
    }
    table[section][key] = tv;
  };
  if (!j.is_object()) throw ConfigError("json: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      for (const auto& [k2, v2] : value.items()) put(key, k2, v2);
    } else {
      put("", key, value);
    }
  }
  return config_from_reader(TomlReader(std::move(table)));
}

RunConfig RunConfig::load(const std::string& path) {
  const std::string text = read_file(path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    return from_json(text);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml")
    return from_toml(text);
  throw ConfigError("config: expected a .toml or .json file: " + path);
}

std::string RunConfig::to_toml() const {
  std::ostringstream out;
  out << "run_id = \"" << run_id << "\"\n";
  out << "output_dir = \"" << output_dir << "\"\n";
  out << "seeds = [";
  for (size_t i = 0; i < seeds.size(); ++i)
    out << (i ? ", " : "") << seeds[i];
  out << "]\n";
  out << "total_steps = " << total_steps << "\n";
  out << "eval_interval = " << eval_interval << "\n";
  out << "eval_episodes = " << eval_episodes << "\n";
  out << "warmup_steps = " << warmup_steps << "\n";
  out << "buffer_capacity = " << buffer_capacity << "\n";

  out << "\n[env]\n";
  if (env.type == EnvSpec::Type::Wave) {
    const WaveSpec& w = env.wave;
    out << "type = \"wave\"\n";
    out << "wave = \"" << (w.kind == WaveSpec::Kind::Square ? "square" : "cosine")
        << "\"\n";
    out << "amplitude = " << fmt_double(w.amplitude) << "\n";
    out << "period = " << w.period << "\n";
    out << "episode_length = " << w.episode_length << "\n";
    out << "action_low = " << fmt_double(w.action_low) << "\n";
    out << "action_high = " << fmt_double(w.action_high) << "\n";
  } else {
    const PendulumSpec& p = env.pendulum;
    out << "type = \"pendulum\"\n";
    out << "mass = " << fmt_double(p.mass) << "\n";
    out << "length = " << fmt_double(p.length) << "\n";
    out << "gravity = " << fmt_double(p.gravity) << "\n";
    out << "dt = " << fmt_double(p.dt) << "\n";
    out << "max_torque = " << fmt_double(p.max_torque) << "\n";
    out << "max_speed = " << fmt_double(p.max_speed) << "\n";
    out << "episode_length = " << p.episode_length << "\n";
  }

  out << "\n[agent]\n";
  out << "algorithm = \"" << to_string(agent.algorithm) << "\"\n";
  out << "gamma = " << fmt_double(agent.gamma) << "\n";
  out << "tau = " << fmt_double(agent.tau) << "\n";
  out << "lr = " << fmt_double(agent.lr) << "\n";
  out << "batch_size = " << agent.batch_size << "\n";
  out << "hidden = [";
  for (size_t i = 0; i < agent.hidden.size(); ++i)
    out << (i ? ", " : "") << agent.hidden[i];
  out << "]\n";
  if (agent.entropy_auto) out << "entropy = \"auto\"\n";
  else out << "entropy = " << fmt_double(agent.alpha) << "\n";
  out << "policy_delay = " << agent.policy_delay << "\n";
  out << "target_noise = " << fmt_double(agent.target_noise) << "\n";
  out << "target_noise_clip = " << fmt_double(agent.target_noise_clip) << "\n";
  out << "exploration_noise = " << fmt_double(agent.exploration_noise) << "\n";
  out << "ddpg_mode = " << (agent.ddpg_mode ? "true" : "false") << "\n";

  const RegularizerSpec& g = agent.regularizer;
  out << "\n[regularizer]\n";
  out << "kind = \"" << to_string(g.kind) << "\"\n";
  out << "lambda_t = " << fmt_double(g.lambda_t) << "\n";
  out << "lambda_s = " << fmt_double(g.lambda_s) << "\n";
  out << "epsilon = " << fmt_double(g.epsilon) << "\n";
  out << "spatial_sigma = " << fmt_double(g.spatial_sigma) << "\n";
  out << "aggregation = \"" << to_string(g.aggregation) << "\"\n";
  return out.str();
}

std::string RunConfig::config_hash() const { return to_hex(fnv1a64(to_toml())); }

std::string RunConfig::resolved_output_dir() const {
  std::filesystem::path p(output_dir);
  if (p.is_absolute()) return output_dir;
  if (const char* root = std::getenv(kOutputRootEnvVar); root && *root)
    return (std::filesystem::path(root) / p).string();
  return output_dir;
}

std::string RunConfig::run_dir() const {
  return (std::filesystem::path(resolved_output_dir()) / run_id).string();
}

}  // namespace gradcaps
