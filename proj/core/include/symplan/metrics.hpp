#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symplan/decode.hpp"
#include "symplan/domains.hpp"
#include "symplan/expansion.hpp"

namespace symplan {

struct ProblemResult {
  std::string problem_id;
  Split split = Split::validation;
  Strategy strategy = Strategy::greedy;
  std::optional<int> plan_length;  // empty = unsolved (|pi| = infinity)
  int pi_star = 0;                 // shortest known plan
  bool bound_only = false;         // pi_star is a policy upper bound
};

// fraction of problems with a valid plan; throws on an empty set
double coverage(const std::vector<ProblemResult>& results);

struct QualityScores {
  double qs = 0.0;
  std::optional<double> qs_s;  // empty = N/A (nothing solved)
};
// QS = (1/|P|) sum pi*/|pi| with unsolved contributing 0; QS_S divides by the
// solved count instead.
QualityScores quality_scores(const std::vector<ProblemResult>& results);

struct PiStar {
  int length = 0;
  bool bound_only = false;
};
// exact h*(init) via expansion when it fits under the cap, otherwise the
// reference-policy plan length flagged bound_only
PiStar oracle_pi_star(const GroundTask& task, std::size_t state_cap = kDefaultStateCap);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single seed
  int n = 0;
};
MeanStd aggregate(const std::vector<double>& per_seed);

struct SeedMetrics {
  double coverage = 0.0;
  double qs = 0.0;
  std::optional<double> qs_s;
  double bound_only_fraction = 0.0;
};
SeedMetrics compute_seed_metrics(const std::vector<ProblemResult>& results);

struct CellKey {
  std::string domain;
  std::string split;
  std::string strategy;
  std::string loss_flag;  // "cl" | "nocl"
  bool operator<(const CellKey& o) const {
    return std::tie(domain, split, strategy, loss_flag) <
           std::tie(o.domain, o.split, o.strategy, o.loss_flag);
  }
};

struct CellData {
  std::vector<SeedMetrics> seeds;
};

struct ReportRow {
  CellKey key;
  std::string metric;  // coverage | qs | qs_s
  MeanStd value;
  bool valid = true;  // false renders N/A (qs_s with zero coverage everywhere)
  double bound_only_fraction = 0.0;
};

std::vector<ReportRow> aggregate_cells(const std::map<CellKey, CellData>& cells);

// report.csv: domain, split, strategy, loss_flag, metric, mean, std, n_seeds,
// bound_only_fraction. report.md bolds the best mean per (split, metric).
void emit_report(const std::vector<ReportRow>& rows, const std::string& out_dir,
                 const std::string& config_hash);
std::vector<ReportRow> parse_report_csv(const std::string& path);

}  // namespace symplan
