#pragma once

#include <map>
#include <string>

#include "symplan/model.hpp"
#include "symplan/tokenizer.hpp"

namespace symplan {

// Checkpoint file: 8-byte magic, u32 version, u64 header length, JSON header
// (config + vocabulary + named-tensor index + metadata), then the raw float32
// tensor data in index order (column-major).
void save_checkpoint(const std::string& path, const Model<float>& model, const Vocabulary& vocab,
                     const std::map<std::string, std::string>& meta = {});

struct LoadedCheckpoint {
  ModelConfig config;
  Vocabulary vocab;
  std::map<std::string, std::string> meta;
  Model<float> model;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace symplan
