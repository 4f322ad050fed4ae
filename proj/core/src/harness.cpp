#include "symplan/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "symplan/checkpoint.hpp"
#include "symplan/parallel.hpp"

namespace symplan {

namespace fs = std::filesystem;

void write_text_file(const std::string& path, const std::string& content) {
  fs::create_directories(fs::path(path).parent_path().empty()
                             ? fs::path(".")
                             : fs::path(path).parent_path());
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << content;
}

PreparedData prepare_data(const ExperimentConfig& cfg, bool expand_training,
                          bool expand_validation) {
  PreparedData data;
  for (Split split :
       {Split::training, Split::validation, Split::interpolation, Split::extrapolation}) {
    for (const auto& spec : schedule_specs(cfg.schedule, split, cfg.instance_seed)) {
      data.instances[split].push_back(generate(spec));
    }
  }
  if (data.instances[Split::training].empty()) throw Error("empty training schedule");
  data.vocab = Vocabulary::build(data.instances[Split::training].front().problem,
                                 cfg.vocab_objects);

  auto expand_split = [&](Split split, std::deque<Expansion>& store,
                          std::vector<const Expansion*>& ptrs) {
    const auto& instances = data.instances[split];
    store.resize(instances.size());
    parallel_for(instances.size(), [&](std::size_t i) {
      store[i] = expand(GroundTask(instances[i].problem), cfg.state_cap,
                        instances[i].id + "-" + split_name(split));
    });
    for (const Expansion& e : store) ptrs.push_back(&e);
  };
  if (expand_training) expand_split(Split::training, data.training_store, data.training);
  if (expand_validation) {
    expand_split(Split::validation, data.validation_store, data.validation);
  }

  data.model_config = cfg.model;
  data.model_config.vocab_size = data.vocab.size();
  data.model_config.atom_width = data.vocab.atom_width();
  if (cfg.variant == Variant::decoder_only && cfg.model.max_positions <= 0) {
    data.model_config.max_positions = 512;
  }
  return data;
}

Model<float> build_model(const ModelConfig& cfg, std::uint64_t seed) {
  Model<float> model(cfg);
  Rng init_rng(Rng::mix(seed ^ 0x1417a2bULL));
  model.init_params(init_rng);
  return model;
}

namespace {

std::string scores_csv(const TrainResult& r) {
  std::ostringstream os;
  os << "epoch,step,coverage,pct_max_tokens,pct_invalid,pct_malformed,token_accuracy,val_l_pred,"
        "att_discrepancy,hid_discrepancy\n";
  os.precision(10);
  for (const auto& es : r.scores) {
    os << es.epoch << "," << es.step << "," << es.score.coverage << ","
       << es.score.pct_max_tokens << "," << es.score.pct_invalid << ","
       << es.score.pct_malformed << "," << es.score.token_accuracy << "," << es.score.loss << ","
       << es.discrepancy.att << "," << es.discrepancy.hid << "\n";
  }
  return os.str();
}

std::string log_csv(const TrainResult& r, const std::string& config_hash) {
  std::ostringstream os;
  os << "# config_hash=" << config_hash << "\n";
  os << "step,l_pred,l_att,l_hid,total,lr,grad_norm\n";
  os.precision(10);
  for (const auto& row : r.log) {
    os << row.step << "," << row.loss.l_pred << "," << row.loss.l_att << "," << row.loss.l_hid
       << "," << row.loss.total << "," << row.lr << "," << row.grad_norm << "\n";
  }
  return os.str();
}

const char* verdict_reason(const DivergenceVerdict& v) {
  switch (v.reason) {
    case DivergenceVerdict::Reason::none: return "none";
    case DivergenceVerdict::Reason::nan: return "nan";
    case DivergenceVerdict::Reason::plateau_spike: return "plateau_spike";
  }
  return "?";
}

}  // namespace

ArmArtifacts train_arm(const ExperimentConfig& cfg, const PreparedData& data, std::uint64_t seed,
                       const std::string& run_dir) {
  fs::create_directories(run_dir);
  Model<float> model = build_model(data.model_config, seed);
  TrainConfig tc = cfg.train;
  tc.seed = seed;

  // one fixed evaluation set shared by every arm and seed
  const ValidationContext val =
      make_validation(data.validation.empty() ? data.training : data.validation, data.vocab,
                      data.model_config.variant, tc.renaming, tc.validation_samples,
                      tc.heldout_pairs, cfg.instance_seed);

  ArmArtifacts out;
  out.seed = seed;
  out.result = run_training(model, tc, data.training, val);

  Model<float> best(data.model_config);
  best.params = out.result.best_params;
  out.checkpoint_path = (fs::path(run_dir) / "checkpoint.bin").string();
  std::map<std::string, std::string> meta{
      {"config_hash", cfg.config_hash},
      {"seed", std::to_string(seed)},
      {"best_epoch", std::to_string(out.result.best_epoch)},
      {"diverged", out.result.verdict.diverged ? "true" : "false"},
      {"init_checksum", std::to_string(out.result.init_checksum)},
  };
  save_checkpoint(out.checkpoint_path, best, data.vocab, meta);

  out.log_path = (fs::path(run_dir) / "train_log.csv").string();
  write_text_file(out.log_path, log_csv(out.result, cfg.config_hash));
  out.scores_path = (fs::path(run_dir) / "scores.csv").string();
  write_text_file(out.scores_path, scores_csv(out.result));

  nlohmann::json manifest;
  manifest["config_hash"] = cfg.config_hash;
  manifest["seed"] = seed;
  manifest["variant"] = variant_name(data.model_config.variant);
  manifest["loss"] = cfg.contrastive ? "cl" : "nocl";
  manifest["renaming"] = renaming_mode_name(tc.renaming);
  manifest["model"] = nlohmann::json::parse(data.model_config.to_json());
  manifest["diverged"] = out.result.verdict.diverged;
  manifest["divergence_reason"] = verdict_reason(out.result.verdict);
  manifest["divergence_step"] = out.result.verdict.step;
  manifest["best_epoch"] = out.result.best_epoch;
  manifest["best_checkpoint"] = out.checkpoint_path;
  manifest["init_checksum"] = out.result.init_checksum;
  manifest["best_score"] = {{"coverage", out.result.best_score.coverage},
                            {"pct_max_tokens", out.result.best_score.pct_max_tokens},
                            {"pct_invalid", out.result.best_score.pct_invalid},
                            {"pct_malformed", out.result.best_score.pct_malformed},
                            {"token_accuracy", out.result.best_score.token_accuracy},
                            {"loss", out.result.best_score.loss}};
  out.manifest_path = (fs::path(run_dir) / "run_manifest.json").string();
  write_text_file(out.manifest_path, manifest.dump(2));
  return out;
}

DecodeRun decode_split(const ExperimentConfig& cfg, const PreparedData& data,
                       const Model<float>& model, Split split, Strategy strategy) {
  DecodeRun run;
  const auto it = data.instances.find(split);
  if (it == data.instances.end() || it->second.empty()) return run;
  const auto& instances = it->second;
  std::deque<GroundTask> tasks;
  for (const auto& inst : instances) tasks.emplace_back(inst.problem);

  run.problem_ids.resize(instances.size());
  run.pi_star.resize(instances.size());
  run.bound_only.resize(instances.size());
  run.results.resize(instances.size());
  DecodeConfig dc;
  dc.strategy = strategy;
  parallel_for(instances.size(), [&](std::size_t i) {
    run.problem_ids[i] = instances[i].id;
    const PiStar ps = oracle_pi_star(tasks[i], cfg.state_cap);
    run.pi_star[i] = ps.length;
    run.bound_only[i] = ps.bound_only;
    try {
      run.results[i] = decode(tasks[i], data.vocab, model, dc, cfg.deterministic);
    } catch (const std::exception& ex) {
      run.results[i].outcome = Outcome::malformed_action;
      run.results[i].note = ex.what();
    }
  });
  return run;
}

void write_decode_records(const std::string& path, const ExperimentConfig& cfg,
                          const PreparedData& data, Split split, Strategy strategy,
                          const DecodeRun& run) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  nlohmann::json meta;
  meta["config_hash"] = cfg.config_hash;
  meta["split"] = split_name(split);
  meta["strategy"] = strategy_name(strategy);
  f << meta.dump() << "\n";
  const auto& instances = data.instances.at(split);
  for (std::size_t i = 0; i < run.results.size(); ++i) {
    const GroundTask task(instances[i].problem);
    f << decode_record_json(run.problem_ids[i], strategy, task, run.results[i]) << "\n";
  }
}

std::map<CellKey, CellData> evaluate_arm(const ExperimentConfig& cfg, const PreparedData& data,
                                         const std::vector<ArmArtifacts>& arms,
                                         const std::vector<Split>& splits) {
  std::map<CellKey, CellData> cells;
  const std::string loss_flag = cfg.contrastive ? "cl" : "nocl";
  for (const auto& arm : arms) {
    const LoadedCheckpoint ckpt = load_checkpoint(arm.checkpoint_path);
    for (Split split : splits) {
      for (Strategy strategy : cfg.strategies) {
        if (ckpt.config.variant == Variant::encoder_only &&
            strategy != Strategy::heuristic_greedy) {
          continue;
        }
        if (ckpt.config.variant != Variant::encoder_only &&
            strategy == Strategy::heuristic_greedy) {
          continue;
        }
        const DecodeRun run = decode_split(cfg, data, ckpt.model, split, strategy);
        if (run.results.empty()) continue;
        std::vector<ProblemResult> results;
        for (std::size_t i = 0; i < run.results.size(); ++i) {
          ProblemResult pr;
          pr.problem_id = run.problem_ids[i];
          pr.split = split;
          pr.strategy = strategy;
          pr.pi_star = run.pi_star[i];
          pr.bound_only = run.bound_only[i];
          if (run.results[i].outcome == Outcome::solved) {
            pr.plan_length = static_cast<int>(run.results[i].plan.size());
          }
          results.push_back(pr);
        }
        const CellKey key{domain_name(cfg.domain), split_name(split), strategy_name(strategy),
                          loss_flag};
        cells[key].seeds.push_back(compute_seed_metrics(results));
      }
    }
  }
  return cells;
}

AblationResult run_ablation(const ExperimentConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  AblationResult out;

  struct Job {
    std::string arm;
    std::uint64_t seed;
    ExperimentConfig cfg;
    std::string dir;
  };
  std::vector<Job> jobs;
  for (const std::string arm : {"cl", "nocl"}) {
    ExperimentConfig arm_cfg = cfg;
    arm_cfg.contrastive = arm == "cl";
    arm_cfg.train.weights.w2 = arm_cfg.contrastive ? cfg.train.weights.w2 : 0.0;
    arm_cfg.train.weights.w3 = arm_cfg.contrastive ? cfg.train.weights.w3 : 0.0;
    for (std::uint64_t seed : cfg.seeds) {
      jobs.push_back({arm, seed, arm_cfg,
                      (fs::path(out_dir) / (arm + "-seed" + std::to_string(seed))).string()});
    }
  }

  const PreparedData data = prepare_data(cfg);
  std::vector<ArmArtifacts> artifacts(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    artifacts[i] = train_arm(jobs[i].cfg, data, jobs[i].seed, jobs[i].dir);
  });

  out.divergences["cl"] = 0;
  out.divergences["nocl"] = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    out.arms[jobs[i].arm].push_back(artifacts[i]);
    if (artifacts[i].result.verdict.diverged) ++out.divergences[jobs[i].arm];
  }

  // shared initial weights per seed across arms (same seed -> same checksum)
  out.shared_init_verified = true;
  for (std::uint64_t seed : cfg.seeds) {
    std::uint64_t checksum = 0;
    bool first = true;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (jobs[i].seed != seed) continue;
      if (first) {
        checksum = artifacts[i].result.init_checksum;
        first = false;
      } else if (artifacts[i].result.init_checksum != checksum) {
        out.shared_init_verified = false;
      }
    }
  }

  // paired loss curves: one row per (arm, seed, epoch)
  std::ostringstream curves;
  curves << "# config_hash=" << cfg.config_hash << "\n";
  curves << "arm,seed,epoch,step,val_l_pred,att_discrepancy,hid_discrepancy,coverage\n";
  curves.precision(10);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    for (const auto& es : artifacts[i].result.scores) {
      curves << jobs[i].arm << "," << jobs[i].seed << "," << es.epoch << "," << es.step << ","
             << es.score.loss << "," << es.discrepancy.att << "," << es.discrepancy.hid << ","
             << es.score.coverage << "\n";
    }
  }
  out.curves_csv = (fs::path(out_dir) / "ablation_curves.csv").string();
  write_text_file(out.curves_csv, curves.str());

  std::ostringstream div;
  div << "# config_hash=" << cfg.config_hash << "\n";
  div << "arm,runs,divergences\n";
  for (const auto& [arm, arms] : out.arms) {
    div << arm << "," << arms.size() << "," << out.divergences[arm] << "\n";
  }
  out.divergence_csv = (fs::path(out_dir) / "divergences.csv").string();
  write_text_file(out.divergence_csv, div.str());
  return out;
}

std::string inspect_pair(const Model<float>& model, const Vocabulary& vocab,
                         const Expansion& expansion, RenamingMode mode, std::uint64_t seed) {
  Rng rng(Rng::mix(seed ^ 0x1252ec7ULL));
  const LabeledSample sample = sample_pair({&expansion}, rng);
  const bool with_plan = model.cfg.variant == Variant::encoder_decoder;
  const bool with_flat = model.cfg.variant == Variant::decoder_only;
  const TokenizedPair pair =
      build_pair(sample, vocab, mode, with_plan, with_flat, rng, /*shuffle=*/false);

  Graph<float> g;
  g.recording = false;
  auto bound = model.bind(g);
  auto forward = [&](const EncodedAtoms& x, const std::vector<std::int32_t>& y,
                     const FlatEncoding& flat) {
    Trace<float> t;
    if (model.cfg.variant == Variant::decoder_only) {
      std::vector<std::int32_t> prefix(flat.tokens.begin(), flat.tokens.end() - 1);
      t = model.decoder_only_forward(bound, prefix);
    } else {
      t = model.encoder_forward(bound, x);
      if (model.cfg.variant == Variant::encoder_only) {
        t.h_pred = model.heuristic_readout(bound, t);
      } else {
        std::vector<std::int32_t> prefix(y.begin(), y.end() - 1);
        model.decoder_forward(bound, t.enc_out, prefix, &t);
      }
    }
    return t;
  };
  Trace<float> ta = forward(pair.xa, pair.ya, pair.flat_a);
  Trace<float> tb = forward(pair.xb, pair.yb, pair.flat_b);

  nlohmann::json j;
  j["problem_id"] = expansion.problem_id;
  j["renaming_mode"] = renaming_mode_name(mode);
  j["h_star"] = sample.h_star;
  auto mat_json = [](const Mat<float>& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::json mods = nlohmann::json::array();
  double att_total = 0.0;
  for (std::size_t i = 0; i < ta.attn.size(); ++i) {
    nlohmann::json m;
    m["layer"] = ta.attn[i].layer;
    m["head"] = ta.attn[i].head;
    m["kind"] = ta.attn[i].kind == AttnKind::enc_self
                    ? "enc_self"
                    : (ta.attn[i].kind == AttnKind::dec_self ? "dec_self" : "dec_cross");
    const Mat<float> diff = ta.attn[i].alpha.val() - tb.attn[i].alpha.val();
    const double disc = static_cast<double>(diff.squaredNorm());
    att_total += disc;
    m["alpha"] = mat_json(ta.attn[i].alpha.val());
    m["alpha_renamed"] = mat_json(tb.attn[i].alpha.val());
    m["discrepancy"] = disc;
    mods.push_back(std::move(m));
  }
  j["attention"] = mods;
  j["att_discrepancy_total"] = att_total;
  double hid_total = 0.0;
  auto hid_stream = [&](const std::vector<Value<float>>& ha, const std::vector<Value<float>>& hb,
                        const char* name) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < ha.size(); ++l) {
      const int k = model.cfg.k;
      const Mat<float> a = ha[l].val().leftCols(k);
      const Mat<float> b2 = hb[l].val().leftCols(k);
      const double disc = static_cast<double>((a - b2).squaredNorm());
      hid_total += disc;
      layers.push_back({{"layer", l}, {"discrepancy", disc}});
    }
    j["hidden"][name] = layers;
  };
  hid_stream(ta.enc_hidden, tb.enc_hidden, "encoder");
  hid_stream(ta.dec_hidden, tb.dec_hidden, "decoder");
  j["hid_discrepancy_total"] = hid_total;
  if (model.cfg.variant == Variant::encoder_only) {
    j["h_pred"] = static_cast<double>(ta.h_pred.scalar());
    j["h_pred_renamed"] = static_cast<double>(tb.h_pred.scalar());
  }
  return j.dump(2);
}

}  // namespace symplan
