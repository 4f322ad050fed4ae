#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symplan/rng.hpp"
#include "symplan/strips.hpp"

namespace symplan {

enum class Domain { blocksworld, gripper, logistics, visitall };

const char* domain_name(Domain d);
Domain domain_from_name(const std::string& name);

struct InstanceSpec {
  Domain domain;
  int size_parameter;  // #blocks / #balls / #goals / #cells
  std::uint64_t seed = 0;
};

struct GeneratedInstance {
  InstanceSpec spec;
  std::string id;
  std::string domain_text;
  std::string problem_text;
  Problem problem;
};

// Deterministic for a fixed spec; the emitted PDDL is byte-identical across
// runs. Throws Error for size_parameter < 1.
GeneratedInstance generate(const InstanceSpec& spec);

const std::string& domain_pddl(Domain d);

// Suboptimal-but-valid plan from the per-domain reference policy: optimal for
// gripper, <= 2x optimal for blocksworld/visitall, finite for logistics.
std::vector<GroundAction> reference_policy_plan(const GroundTask& task);
std::vector<GroundAction> reference_policy_plan(const Problem& p);

enum class Split { training, validation, interpolation, extrapolation };
const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct SplitSchedule {
  Domain domain;
  std::vector<int> training, validation, interpolation, extrapolation;
  // total instance counts per split, spread round-robin over the sizes
  int training_count = 0, validation_count = 0, interpolation_count = 0,
      extrapolation_count = 0;

  static SplitSchedule defaults(Domain d);
  const std::vector<int>& sizes(Split s) const;
  int count(Split s) const;
};

struct ManifestEntry {
  std::string id;
  std::string problem_file;
  std::string domain_file;
  Domain domain;
  int size = 0;
  Split split = Split::training;
  std::uint64_t seed = 0;
};

// Writes PDDL files plus manifest.jsonl into out_dir; returns the manifest.
std::vector<ManifestEntry> emit_split(const SplitSchedule& schedule, const std::string& out_dir,
                                      std::uint64_t base_seed);

// Expands a schedule into instance specs without touching the filesystem.
std::vector<InstanceSpec> schedule_specs(const SplitSchedule& schedule, Split split,
                                         std::uint64_t base_seed);

}  // namespace symplan
