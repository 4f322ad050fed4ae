#include "symplan/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace symplan {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  std::size_t b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_text(ss.str());
}

KeyValueConfig KeyValueConfig::from_text(const std::string& text) {
  KeyValueConfig kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    kv.values_[key] = value;
  }
  return kv;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (...) {
    throw ConfigError("config key '" + key + "': expected integer, got '" + it->second + "'");
  }
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (...) {
    throw ConfigError("config key '" + key + "': expected number, got '" + it->second + "'");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError("config key '" + key + "': expected boolean, got '" + it->second + "'");
}

std::vector<std::int64_t> KeyValueConfig::get_int_list(const std::string& key,
                                                       std::vector<std::int64_t> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::int64_t> out;
  std::stringstream ss(it->second);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    out.push_back(std::stoll(part));
  }
  return out;
}

std::vector<std::string> KeyValueConfig::get_string_list(
    const std::string& key, std::vector<std::string> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out;
  std::stringstream ss(it->second);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::string KeyValueConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) {  // std::map iterates sorted
    out += k + "=" + v + "\n";
  }
  return out;
}

std::uint64_t KeyValueConfig::hash() const {
  const std::string text = canonical();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string KeyValueConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
  ExperimentConfig cfg;
  cfg.domain = domain_from_name(kv.get_string("domain", "gripper"));
  cfg.schedule = SplitSchedule::defaults(cfg.domain);
  auto override_sizes = [&](const char* key, std::vector<int>& sizes) {
    if (!kv.has(key)) return;
    sizes.clear();
    for (auto v : kv.get_int_list(key, {})) sizes.push_back(static_cast<int>(v));
  };
  override_sizes("sizes.training", cfg.schedule.training);
  override_sizes("sizes.validation", cfg.schedule.validation);
  override_sizes("sizes.interpolation", cfg.schedule.interpolation);
  override_sizes("sizes.extrapolation", cfg.schedule.extrapolation);
  cfg.schedule.training_count =
      static_cast<int>(kv.get_int("count.training", cfg.schedule.training_count));
  cfg.schedule.validation_count =
      static_cast<int>(kv.get_int("count.validation", cfg.schedule.validation_count));
  cfg.schedule.interpolation_count =
      static_cast<int>(kv.get_int("count.interpolation", cfg.schedule.interpolation_count));
  cfg.schedule.extrapolation_count =
      static_cast<int>(kv.get_int("count.extrapolation", cfg.schedule.extrapolation_count));

  cfg.variant = variant_from_name(kv.get_string("variant", "encoder_decoder"));
  const std::string loss = kv.get_string("loss", "cl");
  if (loss != "cl" && loss != "nocl") throw ConfigError("loss must be cl or nocl");
  cfg.contrastive = loss == "cl";
  cfg.seeds.clear();
  for (auto s : kv.get_int_list("seeds", {1, 2, 3})) {
    cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (cfg.seeds.empty()) throw ConfigError("seeds must be non-empty");
  cfg.vocab_objects = static_cast<int>(kv.get_int("vocab_size", cfg.vocab_objects));
  if (kv.has("strategies")) {
    cfg.strategies.clear();
    for (const auto& s : kv.get_string_list("strategies", {})) {
      cfg.strategies.push_back(strategy_from_name(s));
    }
  }
  cfg.out_dir = kv.get_string("out", cfg.out_dir);
  cfg.deterministic = kv.get_bool("deterministic", false);
  cfg.state_cap = static_cast<std::size_t>(kv.get_int("state_cap", kDefaultStateCap));
  cfg.instance_seed = static_cast<std::uint64_t>(kv.get_int("instance_seed", 7));

  // model: desk profile unless profile = paper
  const std::string profile = kv.get_string("profile", "desk");
  cfg.model = profile == "paper" ? ModelConfig::paper(cfg.variant, 0, 0)
                                 : ModelConfig::desk(cfg.variant, 0, 0);
  cfg.model.d = static_cast<int>(kv.get_int("model.d", cfg.model.d));
  cfg.model.heads = static_cast<int>(kv.get_int("model.heads", cfg.model.heads));
  cfg.model.n_layers = static_cast<int>(kv.get_int("model.layers", cfg.model.n_layers));
  cfg.model.k = static_cast<int>(kv.get_int("model.k", cfg.model.k));
  cfg.model.mlp_hidden = static_cast<int>(kv.get_int("model.mlp_hidden", cfg.model.mlp_hidden));
  cfg.model.dropout = kv.get_double("model.dropout", cfg.model.dropout);
  cfg.model.use_layernorm = kv.get_bool("model.layernorm", cfg.model.use_layernorm);
  cfg.model.qkv_bias = kv.get_bool("model.qkv_bias", cfg.model.qkv_bias);
  cfg.model.max_positions =
      static_cast<int>(kv.get_int("model.max_positions", cfg.model.max_positions));
  cfg.model.tied_output = kv.get_bool("model.tied_output", cfg.model.tied_output);

  cfg.train = profile == "paper" ? TrainConfig::paper() : TrainConfig::desk();
  cfg.train.lr = kv.get_double("train.lr", cfg.train.lr);
  cfg.train.min_lr = kv.get_double("train.min_lr", cfg.train.min_lr);
  cfg.train.warmup_steps = static_cast<int>(kv.get_int("train.warmup", cfg.train.warmup_steps));
  cfg.train.horizon = static_cast<int>(kv.get_int("train.horizon", cfg.train.horizon));
  cfg.train.weight_decay = kv.get_double("train.weight_decay", cfg.train.weight_decay);
  cfg.train.grad_clip = kv.get_double("train.grad_clip", cfg.train.grad_clip);
  cfg.train.batch_size = static_cast<int>(kv.get_int("train.batch", cfg.train.batch_size));
  cfg.train.epochs = static_cast<int>(kv.get_int("train.epochs", cfg.train.epochs));
  cfg.train.samples_per_epoch =
      static_cast<int>(kv.get_int("train.samples_per_epoch", cfg.train.samples_per_epoch));
  cfg.train.renaming = renaming_mode_from_name(kv.get_string(
      "train.renaming",
      cfg.variant == Variant::encoder_only ? "rename_one" : "rename_both"));
  cfg.train.normalize_contrastive =
      kv.get_bool("train.normalize_contrastive", cfg.train.normalize_contrastive);
  cfg.train.validation_samples =
      static_cast<int>(kv.get_int("train.validation_samples", cfg.train.validation_samples));
  cfg.train.heldout_pairs =
      static_cast<int>(kv.get_int("train.heldout_pairs", cfg.train.heldout_pairs));
  cfg.train.deterministic = cfg.deterministic;
  if (!cfg.contrastive) {
    cfg.train.weights.w2 = 0.0;  // the "without contrastive loss" arm
    cfg.train.weights.w3 = 0.0;
  }
  cfg.train.weights.w1 = kv.get_double("train.w1", cfg.train.weights.w1);
  if (cfg.contrastive) {
    cfg.train.weights.w2 = kv.get_double("train.w2", cfg.train.weights.w2);
    cfg.train.weights.w3 = kv.get_double("train.w3", cfg.train.weights.w3);
  }

  cfg.config_hash = kv.hash_hex();
  return cfg;
}

}  // namespace symplan
