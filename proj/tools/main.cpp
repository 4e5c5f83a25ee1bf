//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//
// Single entry point: scaffold-decoration diffusion with conservation-aware
// and interaction-prior conditioning. Subcommands cover the whole pipeline
// from schedule inspection to pose export.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "scaffdiff/checkpoint.hpp"
#include "scaffdiff/config.hpp"
#include "scaffdiff/dataset_io.hpp"
#include "scaffdiff/metrics.hpp"
#include "scaffdiff/sampler.hpp"
#include "scaffdiff/selfcheck.hpp"

namespace fs = std::filesystem;
using namespace scaffdiff;

namespace {

std::ostream &open_out(const std::string &path, std::ofstream &file) {
  if (path == "-" || path.empty()) return std::cout;
  file.open(path);
  if (!file.good()) throw ConfigError("cannot write '" + path + "'");
  return file;
}

RunConfig config_from(const std::string &config_path) {
  if (config_path.empty()) return RunConfig{};
  return load_run_config(config_path);
}

/// Conservation for one pocket: a3m_dir/pocket_<id>.a3m when a directory is
/// configured, zeros otherwise. residue_id indexes the conservation track.
AugmentedPocket pocket_with_conservation(const Pocket &pocket, int64_t id,
                                         const std::string &a3m_dir) {
  if (a3m_dir.empty()) return augment_pocket_zero(pocket);
  const fs::path path = fs::path(a3m_dir) / ("pocket_" + std::to_string(id) + ".a3m");
  std::ifstream in(path);
  if (!in.good())
    throw ConfigError("missing alignment file '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  ConservationTrack track = column_conservation(parse_a3m(text));
  std::map<int64_t, int64_t> identity;
  for (int64_t rid : pocket.residue_id) identity[rid] = rid;
  return augment_pocket(pocket, track, identity);
}

// ---------------------------------------------------------------------------

int run_schedule_dump(int64_t T, const std::string &interp,
                      const std::string &out_path) {
  NoiseSchedule schedule =
      build_cosine_schedule(T, beta_interp_from_string(interp));
  std::ofstream file;
  schedule.dump(open_out(out_path, file));
  return 0;
}

int run_conserve(const std::string &a3m_path, const std::string &out_path) {
  std::ifstream in(a3m_path);
  if (!in.good()) throw ConfigError("cannot open '" + a3m_path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  ConservationTrack track = column_conservation(parse_a3m(text));
  std::ofstream file;
  std::ostream &os = open_out(out_path, file);
  char line[64];
  for (size_t i = 0; i < track.scores.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu %.6f\n", i, track.scores[i]);
    os << line;
  }
  return 0;
}

int run_pretrain(const std::string &data_path, const std::string &out_path,
                 int64_t steps, std::optional<uint64_t> seed,
                 const std::string &config_path) {
  RunConfig cfg = config_from(config_path);
  const uint64_t s = resolve_seed(seed, cfg);
  auto dataset = load_dataset(data_path);
  for (auto &tuple : dataset) tuple = center_on_scaffold(tuple).first;
  PretrainResult result =
      pretrain_ipnet(dataset, cfg.ipnet(), steps, s, cfg.lr);
  save_ipnet(out_path, result.model);
  std::cout << "{\"initial_loss\":" << result.initial_loss
            << ",\"final_loss\":" << result.final_loss << ",\"steps\":" << steps
            << ",\"seed\":" << s << "}\n";
  return 0;
}

int run_train(const std::string &data_path, const std::string &iprior_path,
              const std::string &out_path, std::optional<int64_t> T,
              int64_t steps, std::optional<uint64_t> seed,
              const std::string &config_path, const std::string &a3m_dir_flag) {
  RunConfig cfg = config_from(config_path);
  if (T) cfg.T = *T;
  if (!a3m_dir_flag.empty()) cfg.a3m_dir = a3m_dir_flag;
  const uint64_t s = resolve_seed(seed, cfg);

  auto dataset = load_dataset(data_path);
  SCAFFDIFF_CHECK(!dataset.empty(), "train: dataset '" + data_path + "' is empty");
  std::vector<AugmentedPocket> pockets;
  for (size_t i = 0; i < dataset.size(); ++i) {
    AugmentedPocket aug = pocket_with_conservation(
        dataset[i].pocket, static_cast<int64_t>(i), cfg.a3m_dir);
    dataset[i] = center_on_scaffold(dataset[i]).first;
    aug.pocket = dataset[i].pocket;  // conservation is frame-independent
    pockets.push_back(std::move(aug));
  }

  IpNetModel ipnet = load_ipnet(iprior_path);
  SCAFFDIFF_CHECK(ipnet.config.feature_dim == cfg.feature_dim,
                  "train: iprior feature_dim ", ipnet.config.feature_dim,
                  " != configured ", cfg.feature_dim);
  NoiseSchedule schedule = build_cosine_schedule(cfg.T, cfg.interp());
  if (!schedule.valid_chain())
    std::cerr << "warning: literal beta interpretation trains but cannot be "
                 "sampled step by step\n";

  Trainer trainer = make_trainer(dataset, std::move(pockets), ipnet,
                                 cfg.denoiser(), cfg.shift(), schedule, s,
                                 cfg.lr);
  std::cout.precision(10);
  for (int64_t i = 0; i < steps; ++i) {
    TrainStepLog log = trainer.step(i);
    std::cout << "{\"step\":" << log.step << ",\"loss\":" << log.loss
              << ",\"t\":" << log.t << ",\"grad_norm\":" << log.grad_norm
              << "}\n";
  }
  save_diffusion(out_path, trainer.model, cfg.T, cfg.interp());
  return 0;
}

void write_trajectory(const fs::path &path, const Trajectory &traj) {
  std::ofstream out(path);
  SCAFFDIFF_CHECK(out.good(), "cannot write trace '", path.string(), "'");
  auto rows = [](const Tensor &t) {
    nlohmann::json arr = nlohmann::json::array();
    for (int64_t i = 0; i < t.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int64_t j = 0; j < t.cols(); ++j) row.push_back(t.at(i, j));
      arr.push_back(std::move(row));
    }
    return arr;
  };
  for (const auto &step : traj.steps) {
    nlohmann::json j = {{"t", step.t},
                        {"r_t", rows(step.r_t)},
                        {"r0_hat", rows(step.r0_hat)},
                        {"s_t", rows(step.shift_t)}};
    out << j.dump() << "\n";
  }
}

int run_sample(const std::string &model_path, const std::string &iprior_path,
               const std::string &data_path, int64_t n,
               std::optional<uint64_t> seed, const std::string &out_path,
               const std::string &trace_dir, int64_t n_atoms_flag,
               const std::string &a3m_dir_flag, int threads,
               const std::string &config_path) {
  RunConfig cfg = config_from(config_path);
  if (!a3m_dir_flag.empty()) cfg.a3m_dir = a3m_dir_flag;
  const uint64_t s = resolve_seed(seed, cfg);

  DiffusionCheckpoint ckpt = load_diffusion(model_path);
  IpNetModel ipnet = load_ipnet(iprior_path);
  SCAFFDIFF_CHECK(ipnet.config.feature_dim == ckpt.model.denoiser_cfg.feature_dim,
                  "sample: iprior feature width does not match the model");
  NoiseSchedule schedule = build_cosine_schedule(ckpt.T, ckpt.interp);

  auto dataset = load_dataset(data_path);
  SCAFFDIFF_CHECK(!dataset.empty(), "sample: dataset is empty");
  std::vector<int64_t> size_pool;
  for (const auto &tuple : dataset)
    if (tuple.rgroup) size_pool.push_back(tuple.rgroup->size());

  if (!trace_dir.empty()) fs::create_directories(trace_dir);
  std::ofstream out(out_path);
  SCAFFDIFF_CHECK(out.good(), "cannot write '", out_path, "'");

  RngState root(s);
  for (size_t p = 0; p < dataset.size(); ++p) {
    const ComplexTuple &original = dataset[p];
    auto [centered, offset] = center_on_scaffold(original);
    AugmentedPocket aug = pocket_with_conservation(
        original.pocket, static_cast<int64_t>(p), cfg.a3m_dir);
    aug.pocket = centered.pocket;

    SamplerConfig scfg;
    scfg.n_samples = n;
    scfg.n_atoms = n_atoms_flag > 0 ? n_atoms_flag : cfg.n_atoms;
    scfg.seed = root.fork(p).seed();
    scfg.r0_shift_correction = cfg.r0_shift_correction;
    scfg.threads = threads > 0 ? threads : cfg.threads;
    scfg.record_trajectory = !trace_dir.empty();

    std::vector<Trajectory> trajectories;
    std::vector<RGroup> generated = sample_batch(
        ckpt.model, ipnet, aug, centered.scaffold, scfg, size_pool, schedule,
        scfg.record_trajectory ? &trajectories : nullptr);

    for (size_t i = 0; i < generated.size(); ++i) {
      RGroup rg = generated[i];
      translate(rg.coords, offset);  // back to the input frame
      ComplexTuple record;
      record.pocket = original.pocket;
      record.scaffold = original.scaffold;
      record.rgroup = std::move(rg);
      record.pocket_id = static_cast<int64_t>(p);
      out << tuple_to_json(record).dump() << "\n";
      if (scfg.record_trajectory)
        write_trajectory(fs::path(trace_dir) /
                             ("pocket" + std::to_string(p) + "_sample" +
                              std::to_string(i) + ".jsonl"),
                         trajectories[i]);
    }
  }
  return 0;
}

int run_eval(const std::string &data_path, const std::string &generated_path,
             const std::string &a3m_dir_flag, const std::string &out_path,
             const std::string &config_path) {
  RunConfig cfg = config_from(config_path);
  if (!a3m_dir_flag.empty()) cfg.a3m_dir = a3m_dir_flag;

  auto references = load_dataset(data_path);
  auto generated = load_dataset(generated_path);
  SCAFFDIFF_CHECK(!references.empty(), "eval: reference dataset is empty");
  SCAFFDIFF_CHECK(!generated.empty(), "eval: generated dataset is empty");

  std::map<int64_t, std::vector<ComplexTuple>> by_pocket;
  for (auto &mol : generated) {
    const int64_t id = mol.pocket_id.value_or(0);
    SCAFFDIFF_CHECK(id >= 0 && id < static_cast<int64_t>(references.size()),
                    "eval: generated record references pocket ", id,
                    " outside the reference set");
    by_pocket[id].push_back(std::move(mol));
  }

  EvalReport report;
  const InteractionConfig icfg = cfg.interactions();
  for (const auto &[id, mols] : by_pocket) {
    const ComplexTuple &ref = references[static_cast<size_t>(id)];
    AugmentedPocket aug =
        pocket_with_conservation(ref.pocket, id, cfg.a3m_dir);

    PocketEval pe;
    pe.pocket_id = id;
    pe.n_molecules = static_cast<int64_t>(mols.size());
    pe.validity = validity(mols, ref.scaffold, cfg.validity_rules());
    pe.uniqueness = uniqueness(mols, cfg.bond_tol);
    double total = 0.0;
    std::vector<RGroup> rgroups;
    for (const auto &m : mols) {
      total += static_cast<double>(detect_interactions(aug, *m.rgroup, icfg).size());
      rgroups.push_back(*m.rgroup);
    }
    pe.mean_interactions = total / static_cast<double>(mols.size());
    pe.mean_conserved_interactions =
        conserved_interaction_stats(aug, rgroups, cfg.conserved_threshold)
            .first;
    report.pockets.push_back(pe);
  }
  const double np = static_cast<double>(report.pockets.size());
  for (const auto &pe : report.pockets) {
    report.validity += pe.validity / np;
    report.uniqueness += pe.uniqueness / np;
    report.mean_interactions += pe.mean_interactions / np;
    report.mean_conserved_interactions += pe.mean_conserved_interactions / np;
  }

  nlohmann::json j = {
      {"validity", report.validity},
      {"uniqueness", report.uniqueness},
      {"mean_interactions", report.mean_interactions},
      {"mean_conserved_interactions", report.mean_conserved_interactions},
      {"pockets", nlohmann::json::array()}};
  for (const auto &pe : report.pockets)
    j["pockets"].push_back({{"pocket_id", pe.pocket_id},
                            {"n_molecules", pe.n_molecules},
                            {"validity", pe.validity},
                            {"uniqueness", pe.uniqueness},
                            {"mean_interactions", pe.mean_interactions},
                            {"mean_conserved_interactions",
                             pe.mean_conserved_interactions}});
  std::ofstream file;
  open_out(out_path, file) << j.dump(2) << "\n";
  return 0;
}

int run_export_poses(const std::string &generated_path,
                     const std::string &out_dir) {
  auto generated = load_dataset(generated_path);
  fs::create_directories(out_dir);
  char name[64];
  for (size_t i = 0; i < generated.size(); ++i) {
    SCAFFDIFF_CHECK(generated[i].rgroup.has_value(),
                    "export-poses: record ", i + 1, " has no R-group");
    std::snprintf(name, sizeof(name), "pose_%05zu.xyz", i);
    std::ofstream out(fs::path(out_dir) / name);
    write_xyz(out, molecule_atoms(generated[i]),
              "pocket " + std::to_string(generated[i].pocket_id.value_or(0)));
  }
  std::cout << "wrote " << generated.size() << " poses to " << out_dir << "\n";
  return 0;
}

int run_selfcheck() {
  auto results = selfcheck::run_all();
  bool all_ok = true;
  for (const auto &res : results) {
    std::cout << (res.passed ? "[ ok ] " : "[FAIL] ") << res.name
              << "  (worst " << res.worst << ", " << res.seconds << " s)\n";
    all_ok = all_ok && res.passed;
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"scaffdiff: conservation- and interaction-guided scaffold "
               "decoration diffusion"};
  app.require_subcommand(1);

  // schedule dump
  auto *schedule_cmd = app.add_subcommand("schedule", "noise schedule tools");
  schedule_cmd->require_subcommand(1);
  auto *dump_cmd = schedule_cmd->add_subcommand(
      "dump", "write per-timestep coefficients as JSON lines");
  int64_t dump_T = 1000;
  std::string dump_interp = "literal";
  std::string dump_out = "-";
  dump_cmd->add_option("--T", dump_T, "number of timesteps")->required();
  dump_cmd->add_option("--beta-interpretation", dump_interp,
                       "literal | cumulative (default literal; the formulas "
                       "exactly as written)");
  dump_cmd->add_option("--out", dump_out, "output path ('-' = stdout)");

  // conserve
  auto *conserve_cmd = app.add_subcommand(
      "conserve", "per-residue conservation scores from an A3M alignment");
  std::string conserve_a3m, conserve_out = "-";
  conserve_cmd->add_option("--a3m", conserve_a3m, "A3M input")->required();
  conserve_cmd->add_option("--out", conserve_out, "output path");

  // pretrain-iprior
  auto *pre_cmd = app.add_subcommand(
      "pretrain-iprior", "pretrain the interaction prior on affinity labels");
  std::string pre_data, pre_out, pre_config;
  int64_t pre_steps = 500;
  std::optional<uint64_t> pre_seed;
  pre_cmd->add_option("--data", pre_data, "dataset (JSON lines)")->required();
  pre_cmd->add_option("--out", pre_out, "checkpoint path")->required();
  pre_cmd->add_option("--steps", pre_steps, "optimizer steps");
  pre_cmd->add_option("--seed", pre_seed,
                      "RNG seed (falls back to SCAFFDIFF_SEED)");
  pre_cmd->add_option("--config", pre_config, "config file");

  // train
  auto *train_cmd =
      app.add_subcommand("train", "train the denoiser and shift network");
  std::string train_data, train_iprior, train_out, train_config, train_a3m;
  std::optional<int64_t> train_T;
  int64_t train_steps = 1000;
  std::optional<uint64_t> train_seed;
  train_cmd->add_option("--data", train_data, "dataset")->required();
  train_cmd->add_option("--iprior", train_iprior, "pretrained prior checkpoint")
      ->required();
  train_cmd->add_option("--out", train_out, "checkpoint path")->required();
  train_cmd->add_option("--T", train_T, "diffusion steps");
  train_cmd->add_option("--steps", train_steps, "optimizer steps");
  train_cmd->add_option("--seed", train_seed, "RNG seed");
  train_cmd->add_option("--config", train_config, "config file");
  train_cmd->add_option("--a3m-dir", train_a3m,
                        "directory of pocket_<i>.a3m alignments");

  // sample
  auto *sample_cmd = app.add_subcommand("sample", "generate R-groups");
  std::string sample_model, sample_iprior, sample_data, sample_out,
      sample_trace, sample_a3m, sample_config;
  int64_t sample_n = 100, sample_atoms = 0;
  int sample_threads = 0;
  std::optional<uint64_t> sample_seed;
  sample_cmd->add_option("--model", sample_model, "diffusion checkpoint")
      ->required();
  sample_cmd->add_option("--iprior", sample_iprior, "prior checkpoint")
      ->required();
  sample_cmd->add_option("--data", sample_data, "pockets to decorate")
      ->required();
  sample_cmd->add_option("--n", sample_n, "samples per pocket");
  sample_cmd->add_option("--seed", sample_seed, "RNG seed");
  sample_cmd->add_option("--out", sample_out, "output dataset")->required();
  sample_cmd->add_option("--trace", sample_trace,
                         "directory for per-step trajectories");
  sample_cmd->add_option("--n-atoms", sample_atoms,
                         "fixed R-group size (default: empirical)");
  sample_cmd->add_option("--a3m-dir", sample_a3m, "alignment directory");
  sample_cmd->add_option("--threads", sample_threads, "worker threads");
  sample_cmd->add_option("--config", sample_config, "config file");

  // eval
  auto *eval_cmd = app.add_subcommand("eval", "evaluate generated molecules");
  std::string eval_data, eval_gen, eval_a3m, eval_out, eval_config;
  eval_cmd->add_option("--data", eval_data, "reference dataset")->required();
  eval_cmd->add_option("--generated", eval_gen, "generated dataset")
      ->required();
  eval_cmd->add_option("--a3m-dir", eval_a3m, "alignment directory");
  eval_cmd->add_option("--out", eval_out, "report path")->required();
  eval_cmd->add_option("--config", eval_config, "config file");

  // export-poses
  auto *export_cmd =
      app.add_subcommand("export-poses", "write XYZ files for docking tools");
  std::string export_gen, export_dir;
  export_cmd->add_option("--generated", export_gen, "generated dataset")
      ->required();
  export_cmd->add_option("--out-dir", export_dir, "output directory")
      ->required();

  // selfcheck
  app.add_subcommand("selfcheck",
                     "run the built-in invariant suites and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    if (dump_cmd->parsed()) return run_schedule_dump(dump_T, dump_interp, dump_out);
    if (conserve_cmd->parsed()) return run_conserve(conserve_a3m, conserve_out);
    if (pre_cmd->parsed())
      return run_pretrain(pre_data, pre_out, pre_steps, pre_seed, pre_config);
    if (train_cmd->parsed())
      return run_train(train_data, train_iprior, train_out, train_T,
                       train_steps, train_seed, train_config, train_a3m);
    if (sample_cmd->parsed())
      return run_sample(sample_model, sample_iprior, sample_data, sample_n,
                        sample_seed, sample_out, sample_trace, sample_atoms,
                        sample_a3m, sample_threads, sample_config);
    if (eval_cmd->parsed())
      return run_eval(eval_data, eval_gen, eval_a3m, eval_out, eval_config);
    if (export_cmd->parsed()) return run_export_poses(export_gen, export_dir);
    return run_selfcheck();
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
