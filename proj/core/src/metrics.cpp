#include "symplan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace symplan {

double coverage(const std::vector<ProblemResult>& results) {
  if (results.empty()) throw Error("coverage: empty result set");
  int solved = 0;
  for (const auto& r : results) solved += r.plan_length.has_value() ? 1 : 0;
  return static_cast<double>(solved) / results.size();
}

QualityScores quality_scores(const std::vector<ProblemResult>& results) {
  if (results.empty()) throw Error("quality_scores: empty result set");
  double sum = 0.0;
  int solved = 0;
  for (const auto& r : results) {
    if (!r.plan_length.has_value()) continue;  // |pi| = infinity contributes 0
    if (*r.plan_length < 0) throw Error("quality_scores: negative plan length");
    ++solved;
    if (*r.plan_length == 0) {
      sum += r.pi_star == 0 ? 1.0 : 0.0;  // 0/0: an empty optimal plan scores 1
    } else {
      sum += static_cast<double>(r.pi_star) / *r.plan_length;
    }
  }
  QualityScores q;
  q.qs = sum / results.size();
  if (solved > 0) q.qs_s = sum / solved;
  return q;
}

PiStar oracle_pi_star(const GroundTask& task, std::size_t state_cap) {
  try {
    const Expansion e = expand(task, state_cap);
    if (e.h_star_init() == kNoDistance) {
      throw Error("oracle_pi_star: unsolvable instance " + task.problem.problem_name);
    }
    return {e.h_star_init(), false};
  } catch (const CapExceededError&) {
    const auto plan = reference_policy_plan(task);
    return {static_cast<int>(plan.size()), true};
  }
}

MeanStd aggregate(const std::vector<double>& per_seed) {
  MeanStd out;
  out.n = static_cast<int>(per_seed.size());
  if (out.n == 0) return out;
  double sum = 0.0;
  for (double x : per_seed) sum += x;
  out.mean = sum / out.n;
  if (out.n > 1) {
    double ss = 0.0;
    for (double x : per_seed) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / (out.n - 1));
  }
  return out;
}

SeedMetrics compute_seed_metrics(const std::vector<ProblemResult>& results) {
  SeedMetrics m;
  m.coverage = coverage(results);
  const QualityScores q = quality_scores(results);
  m.qs = q.qs;
  m.qs_s = q.qs_s;
  int bound = 0;
  for (const auto& r : results) bound += r.bound_only ? 1 : 0;
  m.bound_only_fraction = static_cast<double>(bound) / results.size();
  return m;
}

std::vector<ReportRow> aggregate_cells(const std::map<CellKey, CellData>& cells) {
  std::vector<ReportRow> rows;
  for (const auto& [key, data] : cells) {
    std::vector<double> cov, qs, qs_s, bound;
    for (const auto& s : data.seeds) {
      cov.push_back(s.coverage);
      qs.push_back(s.qs);
      if (s.qs_s) qs_s.push_back(*s.qs_s);
      bound.push_back(s.bound_only_fraction);
    }
    const double bf = aggregate(bound).mean;
    ReportRow r;
    r.key = key;
    r.bound_only_fraction = bf;
    r.metric = "coverage";
    r.value = aggregate(cov);
    rows.push_back(r);
    r.metric = "qs";
    r.value = aggregate(qs);
    rows.push_back(r);
    r.metric = "qs_s";
    r.value = aggregate(qs_s);
    r.valid = !qs_s.empty();
    rows.push_back(r);
  }
  return rows;
}

void emit_report(const std::vector<ReportRow>& rows, const std::string& out_dir,
                 const std::string& config_hash) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream csv(fs::path(out_dir) / "report.csv");
    if (!csv) throw Error("cannot write report.csv in " + out_dir);
    csv << "# config_hash=" << config_hash << "\n";
    csv << "# std is the sample standard deviation (n-1) over seeds\n";
    csv << "domain,split,strategy,loss_flag,metric,mean,std,n_seeds,bound_only_fraction\n";
    csv.precision(12);
    for (const auto& r : rows) {
      csv << r.key.domain << "," << r.key.split << "," << r.key.strategy << ","
          << r.key.loss_flag << "," << r.metric << ",";
      if (r.valid) {
        csv << r.value.mean << "," << r.value.std;
      } else {
        csv << "N/A,N/A";
      }
      csv << "," << r.value.n << "," << r.bound_only_fraction << "\n";
    }
  }

  // markdown: one table per (domain, metric); best mean per column in bold
  std::ofstream md(fs::path(out_dir) / "report.md");
  if (!md) throw Error("cannot write report.md in " + out_dir);
  md << "# Evaluation report\n\nconfig_hash: `" << config_hash << "`\n";
  std::vector<std::string> domains, splits, metrics{"coverage", "qs", "qs_s"};
  for (const auto& r : rows) {
    if (std::find(domains.begin(), domains.end(), r.key.domain) == domains.end()) {
      domains.push_back(r.key.domain);
    }
    if (std::find(splits.begin(), splits.end(), r.key.split) == splits.end()) {
      splits.push_back(r.key.split);
    }
  }
  char buf[64];
  for (const auto& domain : domains) {
    for (const auto& metric : metrics) {
      std::vector<const ReportRow*> table;
      for (const auto& r : rows) {
        if (r.key.domain == domain && r.metric == metric) table.push_back(&r);
      }
      if (table.empty()) continue;
      md << "\n## " << domain << " — " << metric << " (mean ± std over seeds)\n\n";
      md << "| strategy / loss |";
      for (const auto& s : splits) md << " " << s << " |";
      md << "\n|---|";
      for (std::size_t i = 0; i < splits.size(); ++i) md << "---|";
      md << "\n";
      std::map<std::string, double> col_best;
      for (const auto* r : table) {
        if (!r->valid) continue;
        auto it = col_best.find(r->key.split);
        if (it == col_best.end() || r->value.mean > it->second) col_best[r->key.split] = r->value.mean;
      }
      std::vector<std::pair<std::string, std::string>> row_keys;
      for (const auto* r : table) {
        const auto rk = std::make_pair(r->key.strategy, r->key.loss_flag);
        if (std::find(row_keys.begin(), row_keys.end(), rk) == row_keys.end()) {
          row_keys.push_back(rk);
        }
      }
      for (const auto& [strategy, loss_flag] : row_keys) {
        md << "| " << strategy << " (" << loss_flag << ") |";
        for (const auto& split : splits) {
          const ReportRow* cell = nullptr;
          for (const auto* r : table) {
            if (r->key.strategy == strategy && r->key.loss_flag == loss_flag &&
                r->key.split == split) {
              cell = r;
            }
          }
          if (!cell) {
            md << " – |";
          } else if (!cell->valid) {
            md << " N/A |";
          } else {
            std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", cell->value.mean, cell->value.std);
            const bool best = col_best.count(split) &&
                              cell->value.mean >= col_best[split] - 1e-12;
            md << (best ? " **" : " ") << buf << (best ? "** |" : " |");
          }
        }
        md << "\n";
      }
    }
  }
}

std::vector<ReportRow> parse_report_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path);
  std::vector<ReportRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 9) throw Error("bad report row: " + line);
    ReportRow r;
    r.key = {fields[0], fields[1], fields[2], fields[3]};
    r.metric = fields[4];
    r.valid = fields[5] != "N/A";
    if (r.valid) {
      r.value.mean = std::stod(fields[5]);
      r.value.std = std::stod(fields[6]);
    }
    r.value.n = std::stoi(fields[7]);
    r.bound_only_fraction = std::stod(fields[8]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace symplan
