#pragma once

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "symplan/config.hpp"
#include "symplan/metrics.hpp"
#include "symplan/trainer.hpp"

namespace symplan {

// Generated instances plus expansions of the training/validation splits and
// the domain vocabulary.
struct PreparedData {
  std::map<Split, std::vector<GeneratedInstance>> instances;
  std::deque<Expansion> training_store, validation_store;
  std::vector<const Expansion*> training, validation;
  Vocabulary vocab;
  ModelConfig model_config;  // experiment model config with vocab sizes filled
};

PreparedData prepare_data(const ExperimentConfig& cfg, bool expand_training = true,
                          bool expand_validation = true);

// deterministic per-seed parameter init, independent of the loss flag
Model<float> build_model(const ModelConfig& cfg, std::uint64_t seed);

struct ArmArtifacts {
  std::uint64_t seed = 0;
  std::string checkpoint_path;
  std::string log_path;
  std::string scores_path;
  std::string manifest_path;
  TrainResult result;
};

// one (config, seed) training run with artifacts under run_dir
ArmArtifacts train_arm(const ExperimentConfig& cfg, const PreparedData& data, std::uint64_t seed,
                       const std::string& run_dir);

// decode one split with one strategy; records parallel to the split instances
struct DecodeRun {
  std::vector<std::string> problem_ids;
  std::vector<int> pi_star;
  std::vector<bool> bound_only;
  std::vector<DecodeResult> results;
};
DecodeRun decode_split(const ExperimentConfig& cfg, const PreparedData& data,
                       const Model<float>& model, Split split, Strategy strategy);

void write_decode_records(const std::string& path, const ExperimentConfig& cfg,
                          const PreparedData& data, Split split, Strategy strategy,
                          const DecodeRun& run);

// full matrix for one trained arm: per (split, strategy) seed metrics
std::map<CellKey, CellData> evaluate_arm(const ExperimentConfig& cfg, const PreparedData& data,
                                         const std::vector<ArmArtifacts>& arms,
                                         const std::vector<Split>& splits);

struct AblationResult {
  // per arm ("cl"/"nocl"): one ArmArtifacts per seed
  std::map<std::string, std::vector<ArmArtifacts>> arms;
  std::map<std::string, int> divergences;
  std::string curves_csv;
  std::string divergence_csv;
  bool shared_init_verified = false;
};

// {with, without contrastive} x seeds with shared per-seed initial weights;
// emits paired validation-loss curves and the divergence count table.
AblationResult run_ablation(const ExperimentConfig& cfg, const std::string& out_dir);

// attention/hidden dumps and pairwise discrepancies for one renamed pair
std::string inspect_pair(const Model<float>& model, const Vocabulary& vocab,
                         const Expansion& expansion, RenamingMode mode, std::uint64_t seed);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace symplan
