#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "symplan/domains.hpp"
#include "symplan/model.hpp"
#include "symplan/trainer.hpp"

namespace symplan {

// Plain-text key/value config (TOML-style scalars): `key = value` lines, `#`
// comments, dotted keys for nesting, comma-separated lists. Flags override
// file values.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_text(const std::string& text);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::int64_t> get_int_list(const std::string& key,
                                         std::vector<std::int64_t> fallback) const;
  std::vector<std::string> get_string_list(const std::string& key,
                                           std::vector<std::string> fallback) const;

  // canonical sorted key=value rendering (the hashed form)
  std::string canonical() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// One experiment arm: a domain, a model variant, a loss flag, seeds.
struct ExperimentConfig {
  Domain domain = Domain::gripper;
  SplitSchedule schedule;                    // defaults per domain
  Variant variant = Variant::encoder_decoder;
  bool contrastive = true;                   // "cl" | "nocl"
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int vocab_objects = Vocabulary::kDefaultMaxObjects;
  std::vector<Strategy> strategies{Strategy::greedy, Strategy::applicability_filtered,
                                   Strategy::regrounding};
  std::string out_dir = "runs/out";
  bool deterministic = false;
  std::size_t state_cap = kDefaultStateCap;
  std::uint64_t instance_seed = 7;  // base seed for instance generation

  ModelConfig model;   // vocab_size/atom_width filled after vocabulary build
  TrainConfig train;

  std::string config_hash;  // hash of the source key/value config

  static ExperimentConfig from_kv(const KeyValueConfig& kv);
};

}  // namespace symplan
