// symplan CLI: generation -> expansion -> training -> decoding -> reporting.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "symplan/checkpoint.hpp"
#include "symplan/harness.hpp"
#include "symplan/parallel.hpp"

namespace fs = std::filesystem;
using namespace symplan;

namespace {

struct CommonFlags {
  std::string config_file;
  std::string domain;
  std::string variant;
  std::string loss;
  std::string renaming;
  std::string out;
  std::vector<std::int64_t> seeds;
  std::int64_t vocab_size = -1;
  std::int64_t instance_seed = -1;
  bool deterministic = false;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file, "key=value config file");
  cmd->add_option("--domain", f.domain, "blocksworld|gripper|logistics|visitall");
  cmd->add_option("--variant", f.variant, "encoder_only|encoder_decoder|decoder_only");
  cmd->add_option("--loss", f.loss, "cl|nocl")->check(CLI::IsMember({"cl", "nocl"}));
  cmd->add_option("--renaming", f.renaming, "identity|rename_one|rename_both");
  cmd->add_option("--seed", f.seeds, "training seed(s)");
  cmd->add_option("--vocab-size", f.vocab_size, "object vocabulary size (default 123)");
  cmd->add_option("--instance-seed", f.instance_seed, "base seed for instance generation");
  cmd->add_option("--out", f.out, "output directory/file");
  cmd->add_flag("--deterministic", f.deterministic, "canonical reduction order kernels");
  cmd->add_option("--set", f.overrides, "extra config overrides, key=value")->take_all();
}

ExperimentConfig load_config(const CommonFlags& f) {
  KeyValueConfig kv = f.config_file.empty() ? KeyValueConfig::from_text("")
                                            : KeyValueConfig::from_file(f.config_file);
  if (!f.domain.empty()) kv.set("domain", f.domain);
  if (!f.variant.empty()) kv.set("variant", f.variant);
  if (!f.loss.empty()) kv.set("loss", f.loss);
  if (!f.renaming.empty()) kv.set("train.renaming", f.renaming);
  if (!f.seeds.empty()) {
    std::string s;
    for (auto v : f.seeds) s += (s.empty() ? "" : ",") + std::to_string(v);
    kv.set("seeds", s);
  }
  if (f.vocab_size > 0) kv.set("vocab_size", std::to_string(f.vocab_size));
  if (f.instance_seed >= 0) kv.set("instance_seed", std::to_string(f.instance_seed));
  if (!f.out.empty()) kv.set("out", f.out);
  if (f.deterministic) kv.set("deterministic", "true");
  for (const auto& kvpair : f.overrides) {
    const auto eq = kvpair.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + kvpair);
    kv.set(kvpair.substr(0, eq), kvpair.substr(eq + 1));
  }
  return ExperimentConfig::from_kv(kv);
}

int cmd_gen(const CommonFlags& f, const std::vector<std::int64_t>& sizes, std::int64_t count,
            const std::string& split) {
  ExperimentConfig cfg = load_config(f);
  SplitSchedule schedule = cfg.schedule;
  if (!sizes.empty()) {
    schedule = SplitSchedule{};
    schedule.domain = cfg.domain;
    std::vector<int> sz(sizes.begin(), sizes.end());
    const Split target = split_from_name(split);
    switch (target) {
      case Split::training: schedule.training = sz; schedule.training_count = count; break;
      case Split::validation: schedule.validation = sz; schedule.validation_count = count; break;
      case Split::interpolation:
        schedule.interpolation = sz;
        schedule.interpolation_count = count;
        break;
      case Split::extrapolation:
        schedule.extrapolation = sz;
        schedule.extrapolation_count = count;
        break;
    }
  }
  const std::string out = cfg.out_dir;
  const auto manifest = emit_split(schedule, out, cfg.instance_seed);
  std::cout << "wrote " << manifest.size() << " instances to " << out << "\n";
  return 0;
}

int cmd_expand(const CommonFlags& f, std::int64_t count, const std::string& mode_name) {
  ExperimentConfig cfg = load_config(f);
  const SampleMode mode = mode_name == "heuristic" ? SampleMode::heuristic : SampleMode::plan;
  PreparedData data = prepare_data(cfg, true, false);
  for (const Expansion* e : data.training) {
    std::cout << e->problem_id << ": " << e->states.size() << " states, h*(init)="
              << e->h_star_init() << ", distinct distances=" << e->distances.size() << "\n";
  }
  fs::path out = cfg.out_dir;
  fs::create_directories(out.parent_path().empty() ? "." : out.parent_path().string());
  Rng rng(Rng::mix(cfg.instance_seed ^ 0xda7aULL));
  nlohmann::json meta;
  meta["config_hash"] = cfg.config_hash;
  meta["mode"] = mode_name;
  export_dataset(data.training, static_cast<int>(count), mode, out.string(), rng,
                 meta.dump());
  std::cout << "wrote " << count << " samples to " << out.string() << "\n";
  return 0;
}

int cmd_train(const CommonFlags& f) {
  ExperimentConfig cfg = load_config(f);
  const PreparedData data = prepare_data(cfg);
  const std::string arm = std::string(variant_name(cfg.variant)) + "-" +
                          (cfg.contrastive ? "cl" : "nocl");
  std::vector<ArmArtifacts> arms(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), [&](std::size_t i) {
    const std::string dir =
        (fs::path(cfg.out_dir) / arm / ("seed" + std::to_string(cfg.seeds[i]))).string();
    arms[i] = train_arm(cfg, data, cfg.seeds[i], dir);
  });
  for (const auto& a : arms) {
    std::cout << arm << " seed=" << a.seed << " best_epoch=" << a.result.best_epoch
              << " coverage=" << a.result.best_score.coverage
              << " val_l_pred=" << a.result.best_score.loss
              << (a.result.verdict.diverged ? " DIVERGED" : "") << "\n"
              << "  checkpoint: " << a.checkpoint_path << "\n";
  }
  return 0;
}

int cmd_decode(const CommonFlags& f, const std::string& ckpt_path, const std::string& split_name_,
               const std::string& strategy_name_) {
  ExperimentConfig cfg = load_config(f);
  const LoadedCheckpoint ckpt = load_checkpoint(ckpt_path);
  cfg.vocab_objects = ckpt.vocab.n_objects;
  PreparedData data = prepare_data(cfg, false, false);
  const Split split = split_from_name(split_name_);
  const Strategy strategy = strategy_from_name(strategy_name_);
  const DecodeRun run = decode_split(cfg, data, ckpt.model, split, strategy);
  const std::string out = cfg.out_dir.empty() ? "decode_records.jsonl" : cfg.out_dir;
  write_decode_records(out, cfg, data, split, strategy, run);
  int solved = 0;
  for (const auto& r : run.results) solved += r.outcome == Outcome::solved ? 1 : 0;
  std::cout << "decoded " << run.results.size() << " instances (" << solved << " solved) -> "
            << out << "\n";
  return 0;
}

int cmd_eval(const CommonFlags& f, const std::vector<std::string>& checkpoints,
             const std::vector<std::string>& split_names) {
  ExperimentConfig cfg = load_config(f);
  PreparedData data = prepare_data(cfg, false, false);
  std::vector<Split> splits;
  for (const auto& s : split_names) splits.push_back(split_from_name(s));
  if (splits.empty()) splits = {Split::validation, Split::interpolation};
  std::vector<ArmArtifacts> arms;
  for (const auto& c : checkpoints) {
    ArmArtifacts a;
    a.checkpoint_path = c;
    arms.push_back(a);
  }
  const auto cells = evaluate_arm(cfg, data, arms, splits);
  emit_report(aggregate_cells(cells), cfg.out_dir, cfg.config_hash);
  std::cout << "report written to " << cfg.out_dir << "/report.{csv,md}\n";
  return 0;
}

int cmd_ablate(const CommonFlags& f) {
  ExperimentConfig cfg = load_config(f);
  const AblationResult res = run_ablation(cfg, cfg.out_dir);
  std::cout << "ablation arms: cl=" << res.arms.at("cl").size()
            << " runs, nocl=" << res.arms.at("nocl").size() << " runs\n";
  std::cout << "divergences: cl=" << res.divergences.at("cl")
            << " nocl=" << res.divergences.at("nocl") << "\n";
  std::cout << "shared step-0 weights per seed: "
            << (res.shared_init_verified ? "verified" : "MISMATCH") << "\n";
  std::cout << "curves: " << res.curves_csv << "\n";
  return 0;
}

int cmd_inspect(const CommonFlags& f, const std::string& ckpt_path, std::int64_t size) {
  ExperimentConfig cfg = load_config(f);
  const LoadedCheckpoint ckpt = load_checkpoint(ckpt_path);
  InstanceSpec spec{cfg.domain, static_cast<int>(size), cfg.instance_seed};
  const GeneratedInstance inst = generate(spec);
  const Expansion e = expand(GroundTask(inst.problem), cfg.state_cap, inst.id);
  const RenamingMode mode = cfg.train.renaming;
  const std::string dump = inspect_pair(ckpt.model, ckpt.vocab, e, mode,
                                        cfg.seeds.empty() ? 1 : cfg.seeds.front());
  if (!cfg.out_dir.empty() && cfg.out_dir != "runs/out") {
    write_text_file(cfg.out_dir, dump);
    std::cout << "inspection dump written to " << cfg.out_dir << "\n";
  } else {
    std::cout << dump << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symmetry-aware planning transformers: data, training, decoding, evaluation"};
  app.require_subcommand(1);

  CommonFlags gen_f, expand_f, train_f, decode_f, eval_f, ablate_f, inspect_f;

  auto* gen = app.add_subcommand("gen", "generate PDDL instances and a manifest");
  add_common(gen, gen_f);
  std::vector<std::int64_t> gen_sizes;
  std::int64_t gen_count = 1;
  std::string gen_split = "training";
  gen->add_option("--sizes", gen_sizes, "size parameters (default: full Table-C.1 schedule)");
  gen->add_option("--count", gen_count, "instance count when --sizes is given");
  gen->add_option("--split", gen_split, "split label when --sizes is given");

  auto* expand_cmd = app.add_subcommand("expand", "expand state spaces and export a dataset");
  add_common(expand_cmd, expand_f);
  std::int64_t expand_count = 1000;
  std::string expand_mode = "plan";
  expand_cmd->add_option("--count", expand_count, "number of sampled pairs");
  expand_cmd->add_option("--mode", expand_mode, "plan|heuristic")
      ->check(CLI::IsMember({"plan", "heuristic"}));

  auto* train = app.add_subcommand("train", "train one arm across seeds");
  add_common(train, train_f);

  auto* decode_cmd = app.add_subcommand("decode", "decode a split with one strategy");
  add_common(decode_cmd, decode_f);
  std::string ckpt, decode_split_name = "interpolation", decode_strategy = "greedy";
  decode_cmd->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  decode_cmd->add_option("--split", decode_split_name, "split to decode");
  decode_cmd->add_option("--strategy", decode_strategy,
                         "greedy|applicability_filtered|regrounding|heuristic_greedy");

  auto* eval = app.add_subcommand("eval", "aggregate decode metrics into a report");
  add_common(eval, eval_f);
  std::vector<std::string> eval_ckpts, eval_splits;
  eval->add_option("--checkpoints", eval_ckpts, "per-seed checkpoint files")->required();
  eval->add_option("--splits", eval_splits, "splits to evaluate");

  auto* ablate = app.add_subcommand("ablate", "with/without contrastive loss matrix");
  add_common(ablate, ablate_f);

  auto* inspect = app.add_subcommand("inspect", "dump attention/hidden pair discrepancies");
  add_common(inspect, inspect_f);
  std::string inspect_ckpt;
  std::int64_t inspect_size = 2;
  inspect->add_option("--checkpoint", inspect_ckpt, "checkpoint file")->required();
  inspect->add_option("--size", inspect_size, "instance size parameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_f, gen_sizes, gen_count, gen_split);
    if (expand_cmd->parsed()) return cmd_expand(expand_f, expand_count, expand_mode);
    if (train->parsed()) return cmd_train(train_f);
    if (decode_cmd->parsed()) {
      return cmd_decode(decode_f, ckpt, decode_split_name, decode_strategy);
    }
    if (eval->parsed()) return cmd_eval(eval_f, eval_ckpts, eval_splits);
    if (ablate->parsed()) return cmd_ablate(ablate_f);
    if (inspect->parsed()) return cmd_inspect(inspect_f, inspect_ckpt, inspect_size);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}
