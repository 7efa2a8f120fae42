#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

namespace pourl::cli {
namespace {

struct RawValue {
  enum class Kind { String, Scalar, Bool, Array };
  Kind kind = Kind::Scalar;
  std::string text;                 // String: contents; Scalar: the token
  bool truth = false;               // Bool
  std::vector<std::string> items;   // Array: scalar tokens
  int line = 0;
};

[[noreturn]] void fail(int line, const std::string& message) {
  throw ConfigError("config line " + std::to_string(line) + ": " + message);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_';
    if (!ok) return false;
  }
  return true;
}

bool scalar_token(std::string_view token) {
  if (token.empty()) return false;
  for (char c : token) {
    const bool ok = (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.' || c == 'e' ||
                    c == 'E';
    if (!ok) return false;
  }
  return true;
}

RawValue parse_value(std::string_view text, int line) {
  RawValue value;
  value.line = line;
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') fail(line, "unterminated string");
    const std::string_view body = text.substr(1, text.size() - 2);
    if (body.find('"') != std::string_view::npos || body.find('\\') != std::string_view::npos) {
      fail(line, "strings support neither embedded quotes nor escapes");
    }
    value.kind = RawValue::Kind::String;
    value.text = std::string(body);
    return value;
  }
  if (text == "true" || text == "false") {
    value.kind = RawValue::Kind::Bool;
    value.truth = text == "true";
    return value;
  }
  if (text.front() == '[') {
    if (text.back() != ']') fail(line, "unterminated array");
    value.kind = RawValue::Kind::Array;
    std::string_view body = trim(text.substr(1, text.size() - 2));
    while (!body.empty()) {
      const std::size_t comma = body.find(',');
      const std::string_view item =
          trim(comma == std::string_view::npos ? body : body.substr(0, comma));
      if (!scalar_token(item)) fail(line, "arrays may only hold numbers");
      value.items.emplace_back(item);
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
      if (body.empty()) fail(line, "trailing comma in array");
    }
    return value;
  }
  if (!scalar_token(text)) fail(line, "unrecognized value");
  value.kind = RawValue::Kind::Scalar;
  value.text = std::string(text);
  return value;
}

std::string_view strip_comment(std::string_view raw, int line) {
  bool quoted = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '"') quoted = !quoted;
    if (raw[i] == '#' && !quoted) return raw.substr(0, i);
  }
  if (quoted) fail(line, "unterminated string");
  return raw;
}

double parse_double_token(const std::string& token, int line, const std::string& key) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size() || !std::isfinite(v)) {
    fail(line, key + " is not a finite number");
  }
  return v;
}

std::uint64_t parse_u64_token(const std::string& token, int line, const std::string& key) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    fail(line, key + " is not an unsigned integer");
  }
  return v;
}

class Reader {
 public:
  explicit Reader(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const std::string_view stripped = trim(strip_comment(raw, line));
      if (stripped.empty()) continue;
      const std::size_t eq = stripped.find('=');
      if (eq == std::string_view::npos) {
        fail(line, "expected `key = value` (flat file, no sections)");
      }
      const std::string key{trim(stripped.substr(0, eq))};
      const std::string_view rhs = trim(stripped.substr(eq + 1));
      if (!valid_key(key)) fail(line, "malformed key");
      if (rhs.empty()) fail(line, key + " has no value");
      if (values_.contains(key)) fail(line, "duplicate key " + key);
      values_.emplace(key, parse_value(rhs, line));
    }
  }

  bool has(const std::string& key) const { return values_.contains(key); }

  std::string take_string(const std::string& key, const std::string& fallback) {
    const RawValue* v = take(key);
    if (!v) return fallback;
    if (v->kind != RawValue::Kind::String) fail(v->line, key + " must be a quoted string");
    return v->text;
  }

  double take_double(const std::string& key, double fallback) {
    const RawValue* v = take(key);
    if (!v) return fallback;
    if (v->kind != RawValue::Kind::Scalar) fail(v->line, key + " must be a number");
    return parse_double_token(v->text, v->line, key);
  }

  std::optional<double> take_optional_double(const std::string& key) {
    const RawValue* v = take(key);
    if (!v) return std::nullopt;
    if (v->kind != RawValue::Kind::Scalar) fail(v->line, key + " must be a number");
    return parse_double_token(v->text, v->line, key);
  }

  std::uint64_t take_u64(const std::string& key, std::uint64_t fallback) {
    const RawValue* v = take(key);
    if (!v) return fallback;
    if (v->kind != RawValue::Kind::Scalar) fail(v->line, key + " must be an unsigned integer");
    return parse_u64_token(v->text, v->line, key);
  }

  std::uint32_t take_u32(const std::string& key, std::uint32_t fallback) {
    const std::uint64_t v = take_u64(key, fallback);
    if (v > 0xFFFFFFFFull) throw ConfigError(key + " exceeds the 32-bit range");
    return static_cast<std::uint32_t>(v);
  }

  std::vector<double> take_double_array(const std::string& key, std::vector<double> fallback) {
    const RawValue* v = take(key);
    if (!v) return fallback;
    if (v->kind != RawValue::Kind::Array) fail(v->line, key + " must be an array");
    std::vector<double> out;
    out.reserve(v->items.size());
    for (const std::string& item : v->items) {
      out.push_back(parse_double_token(item, v->line, key));
    }
    return out;
  }

  std::vector<std::uint32_t> take_u32_array(const std::string& key,
                                            std::vector<std::uint32_t> fallback) {
    const RawValue* v = take(key);
    if (!v) return fallback;
    if (v->kind != RawValue::Kind::Array) fail(v->line, key + " must be an array");
    std::vector<std::uint32_t> out;
    out.reserve(v->items.size());
    for (const std::string& item : v->items) {
      const std::uint64_t n = parse_u64_token(item, v->line, key);
      if (n > 0xFFFFFFFFull) fail(v->line, key + " entry exceeds the 32-bit range");
      out.push_back(static_cast<std::uint32_t>(n));
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : values_) {
      if (!consumed_.contains(key)) fail(value.line, "unknown key " + key);
    }
  }

 private:
  const RawValue* take(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
  }

  std::map<std::string, RawValue> values_;
  std::set<std::string> consumed_;
};

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  Reader reader(path);
  ExperimentConfig config;

  const std::uint32_t schema = reader.take_u32("schema_version", 0);
  if (schema != 1) throw ConfigError("schema_version must be present and equal to 1");

  config.scenario = reader.take_string("scenario", "");
  if (config.scenario != "mine" && config.scenario != "converge" &&
      config.scenario != "partition" && config.scenario != "attack" &&
      config.scenario != "learncurve") {
    throw ConfigError("scenario must be one of mine, converge, partition, attack, learncurve");
  }
  config.out_dir = reader.take_string("out_dir", config.out_dir);

  config.sim.seed = reader.take_u64("seed", config.sim.seed);
  config.sim.node_count = reader.take_u32("node_count", config.sim.node_count);
  config.sim.mean_mine_time = reader.take_double_array("mean_mine_time", config.sim.mean_mine_time);
  config.sim.mean_link_delay = reader.take_double("mean_link_delay", config.sim.mean_link_delay);
  config.sim.drop_probability = reader.take_double("drop_probability", config.sim.drop_probability);
  config.sim.max_blocks = reader.take_u64("max_blocks", config.sim.max_blocks);
  config.sim.stop_time = reader.take_optional_double("stop_time");
  const std::string rule = reader.take_string("tie_break", "last_reward");
  if (rule == "last_reward") {
    config.sim.tie_break = TieBreakRule::LastReward;
  } else if (rule == "sum_reward") {
    config.sim.tie_break = TieBreakRule::SumReward;
  } else {
    throw ConfigError("tie_break must be last_reward or sum_reward");
  }
  const std::string payload = reader.take_string("payload", "");
  config.sim.payload.assign(payload.begin(), payload.end());

  const bool has_partition = reader.has("partition_start") || reader.has("partition_end") ||
                             reader.has("partition_side_a");
  if (has_partition) {
    PartitionSpec partition;
    partition.start = reader.take_double("partition_start", -1.0);
    partition.end = reader.take_double("partition_end", -1.0);
    partition.side_a = reader.take_u32_array("partition_side_a", {});
    if (partition.start < 0.0 || partition.end < 0.0 || partition.side_a.empty()) {
      throw ConfigError(
          "partition_start, partition_end, and partition_side_a must be given together");
    }
    config.sim.partitions.push_back(std::move(partition));
  }

  config.learning.alpha = reader.take_double("alpha", config.learning.alpha);
  config.learning.gamma = reader.take_double("gamma", config.learning.gamma);
  config.learning.epsilon = reader.take_double("epsilon", config.learning.epsilon);
  config.learning.sync_interval_C = reader.take_u32("sync_interval", config.learning.sync_interval_C);
  config.learning.batch_size = reader.take_u32("batch_size", config.learning.batch_size);
  config.learning.buffer_capacity =
      reader.take_u32("buffer_capacity", config.learning.buffer_capacity);
  config.learning.hidden_sizes = reader.take_u32_array("hidden_sizes", config.learning.hidden_sizes);

  config.grid.width = reader.take_u32("grid_width", config.grid.width);
  config.grid.height = reader.take_u32("grid_height", config.grid.height);
  config.grid.start_x = reader.take_u32("grid_start_x", config.grid.start_x);
  config.grid.start_y = reader.take_u32("grid_start_y", config.grid.start_y);
  config.grid.goal_x = reader.take_u32("grid_goal_x", config.grid.goal_x);
  config.grid.goal_y = reader.take_u32("grid_goal_y", config.grid.goal_y);
  config.grid.step_reward = reader.take_double("grid_step_reward", config.grid.step_reward);
  config.grid.goal_reward = reader.take_double("grid_goal_reward", config.grid.goal_reward);
  const std::vector<std::uint32_t> walls = reader.take_u32_array("grid_walls", {});
  if (walls.size() % 2 != 0) {
    throw ConfigError("grid_walls must hold x,y pairs (an even number of entries)");
  }
  for (std::size_t i = 0; i < walls.size(); i += 2) {
    config.grid.walls.emplace_back(walls[i], walls[i + 1]);
  }

  config.honest_count = reader.take_u32("honest_count", config.honest_count);
  config.attacker_count = reader.take_u32("attacker_count", config.attacker_count);
  config.tamper_height = reader.take_u64("tamper_height", config.tamper_height);
  config.attack_cases = reader.take_u32("attack_cases", config.attack_cases);

  reader.finish();

  if (config.scenario == "converge" && config.sim.node_count < 2) {
    throw ConfigError("converge scenario needs node_count >= 2");
  }
  if (config.scenario == "partition" && config.sim.partitions.empty()) {
    throw ConfigError("partition scenario needs a partition window");
  }
  return config;
}

}  // namespace pourl::cli
