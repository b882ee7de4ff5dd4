// Command-line driver: synthetic data generation, model and baseline
// training, cold-start evaluation, new-domain adaptation and gradient
// verification. Every subcommand shares one key=value configuration surface:
// --config files are applied first, flags override them, and the resolved
// values are echoed into each JSON report.
//
// Exit codes: 0 success, 2 usage/configuration, 3 data/protocol/metric,
// 4 training failure, 5 gradient check failure.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dacdr/baselines.hpp"
#include "dacdr/data.hpp"
#include "dacdr/errors.hpp"
#include "dacdr/evaluation.hpp"
#include "dacdr/gradcheck.hpp"
#include "dacdr/model.hpp"
#include "dacdr/rng.hpp"
#include "dacdr/runconfig.hpp"
#include "dacdr/training.hpp"

namespace {

using json = nlohmann::json;

// --config files take effect before any flag, wherever they sit on the
// command line, so flags always win.
void apply_config_files(int argc, char** argv, dacdr::RunConfig& rc) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config") {
      if (i + 1 >= argc) throw dacdr::ConfigError("--config expects a path");
      rc.load_file(argv[++i]);
    } else if (arg.rfind("--config=", 0) == 0) {
      rc.load_file(arg.substr(9));
    }
  }
}

// Routes a flag straight into the shared config so file and flag handling
// cannot drift apart.
void bind(CLI::App* cmd, dacdr::RunConfig& rc, const std::string& flag,
          const std::string& key, const std::string& desc) {
  cmd->add_option_function<std::string>(
      flag, [&rc, key](const std::string& v) { rc.set(key, v); }, desc);
}

void bind_data(CLI::App* c, dacdr::RunConfig& rc) {
  bind(c, rc, "--interactions", "interactions", "interaction log (tsv)");
  bind(c, rc, "--side-info", "side_info", "item -> category table (tsv)");
  bind(c, rc, "--max-seq-len", "max_seq_len", "history positions kept per channel");
  bind(c, rc, "--causal", "causal",
       "cut each context at its own timestamp (true|false)");
  bind(c, rc, "--beta", "beta", "held-out fraction of overlapping users");
  bind(c, rc, "--split-seed", "split_seed", "cold-start split seed");
}

void bind_training(CLI::App* c, dacdr::RunConfig& rc) {
  bind(c, rc, "--epochs", "epochs", "training epochs");
  bind(c, rc, "--batch-size", "batch_size", "samples per optimizer step");
  bind(c, rc, "--lr", "lr", "learning rate");
  bind(c, rc, "--optimizer", "optimizer", "adam|sgd");
  bind(c, rc, "--seed", "seed", "initialization and shuffle seed");
  bind(c, rc, "--grad-diag", "grad_diag",
       "record per-group gradient norms each epoch (true|false)");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string basename_of(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

json config_json(const dacdr::RunConfig& rc) {
  json j;
  for (const auto& [k, v] : rc.echo()) j[k] = v;
  return j;
}

json dataset_json(const dacdr::Dataset& ds) {
  json j;
  j["users"] = ds.users.size();
  j["items_src"] = ds.items_src.size();
  j["items_tgt"] = ds.items_tgt.size();
  j["categories"] = ds.categories.size();
  j["src_rows"] = ds.src.size();
  j["tgt_rows"] = ds.tgt.size();
  j["fingerprint_users"] = hex64(ds.users.fingerprint());
  j["fingerprint_items_src"] = hex64(ds.items_src.fingerprint());
  j["fingerprint_items_tgt"] = hex64(ds.items_tgt.fingerprint());
  return j;
}

json train_json(const dacdr::TrainReport& r) {
  json j;
  j["epoch_loss"] = r.epoch_loss;
  j["samples"] = r.samples;
  j["wall_seconds"] = r.wall_seconds;
  if (!r.grad_norms.empty()) j["grad_norms"] = r.grad_norms;
  return j;
}

void write_report(const std::string& path, const json& j) {
  if (path.empty()) return;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw dacdr::ConfigError("cannot write report: " + path);
  f << j.dump(2) << '\n';
}

dacdr::Dataset load_dataset(const dacdr::RunConfig& rc, bool rating) {
  if (rc.interactions.empty())
    throw dacdr::ConfigError("--interactions is required");
  dacdr::Dataset ds = dacdr::load_interactions(rc.interactions, rating);
  if (!rc.side_info.empty()) dacdr::load_side_info(ds, rc.side_info);
  return ds;
}

enum class CkKind { model, baseline };

CkKind checkpoint_kind(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw dacdr::IngestError("checkpoint: cannot open " + path);
  char magic[8] = {};
  f.read(magic, sizeof magic);
  if (f.gcount() == 8) {
    const std::string m(magic, 8);
    if (m == "DACDRCK1") return CkKind::model;
    if (m == "DACDRBL1") return CkKind::baseline;
  }
  throw dacdr::IngestError("checkpoint: unrecognized format in " + path);
}

void check_model_matches(const dacdr::Model& m, const dacdr::Dataset& ds) {
  const dacdr::TableSizes& s = m.sizes();
  if (s.users != ds.users.size() || s.items_src != ds.items_src.size() ||
      s.items_tgt != ds.items_tgt.size() || s.categories != ds.categories.size())
    throw dacdr::ConfigError(
        "checkpoint tables do not match the dataset: users " +
        std::to_string(s.users) + "/" + std::to_string(ds.users.size()) +
        ", src items " + std::to_string(s.items_src) + "/" +
        std::to_string(ds.items_src.size()) + ", tgt items " +
        std::to_string(s.items_tgt) + "/" + std::to_string(ds.items_tgt.size()) +
        ", categories " + std::to_string(s.categories) + "/" +
        std::to_string(ds.categories.size()));
}

void print_epochs(const dacdr::TrainReport& r) {
  for (std::size_t e = 0; e < r.epoch_loss.size(); ++e)
    std::printf("  epoch %3zu  loss %.6f\n", e + 1, r.epoch_loss[e]);
  std::printf("  %zu samples, %.2fs\n", r.samples, r.wall_seconds);
}

int run_gen_data(dacdr::RunConfig& rc) {
  if (rc.task != "logit" && rc.task != "rating")
    throw dacdr::ConfigError("task must be 'logit' or 'rating', got '" + rc.task +
                             "'");
  const dacdr::SynthSpec spec = rc.synth_spec();
  const dacdr::SynthSummary s =
      dacdr::synth_generate(spec, rc.out_interactions, rc.out_side);

  std::printf("wrote %s (%zu src + %zu tgt rows) and %s\n",
              rc.out_interactions.c_str(), s.src_rows, s.tgt_rows,
              rc.out_side.c_str());
  std::printf("  overlapping users      %d\n", s.overlapping_users);
  if (!spec.rating_mode) {
    std::printf("  expected positive rate %.4f\n", s.expected_positive_rate);
    std::printf("  realized positive rate %.4f\n", s.positive_rate);
  }

  json rep;
  rep["command"] = "gen-data";
  rep["config"] = config_json(rc);
  rep["outputs"] = {{"interactions", rc.out_interactions},
                    {"side_info", rc.out_side}};
  rep["summary"] = {{"src_rows", s.src_rows},
                    {"tgt_rows", s.tgt_rows},
                    {"overlapping_users", s.overlapping_users},
                    {"expected_positive_rate", s.expected_positive_rate},
                    {"positive_rate", s.positive_rate}};
  write_report(rc.report, rep);
  return 0;
}

int run_train(dacdr::RunConfig& rc) {
  rc.validate();
  dacdr::Dataset ds = load_dataset(rc, rc.rating_mode());
  const dacdr::ColdStartSplit split =
      dacdr::cold_start_split(ds, rc.beta, rc.split_seed);

  dacdr::TrainReport tr;
  std::size_t train_samples = 0;
  if (rc.is_baseline()) {
    std::unique_ptr<dacdr::Baseline> b = dacdr::make_baseline(rc.baseline_config());
    tr = b->fit(ds, split.test_users);
    train_samples = tr.samples;
    if (!rc.checkpoint.empty()) b->save(rc.checkpoint);
  } else {
    const dacdr::ModelConfig mc = rc.model_config();
    dacdr::Rng rng(rc.seed);
    dacdr::Model m(mc, ds.table_sizes(), rng);
    const std::vector<dacdr::SampleInput> samples = dacdr::make_samples(
        ds, split.test_users, false, rc.max_seq_len, rc.causal, 0);
    tr = dacdr::train_model(m, samples, rc.train_config());
    train_samples = samples.size();
    if (!rc.checkpoint.empty()) m.save(rc.checkpoint);
  }

  std::printf("trained %s: %zu samples from %zu warm users (%zu held out cold)\n",
              rc.variant.c_str(), train_samples, split.train_users.size(),
              split.test_users.size());
  print_epochs(tr);
  if (!rc.checkpoint.empty())
    std::printf("  checkpoint %s\n", rc.checkpoint.c_str());

  json rep;
  rep["command"] = "train";
  rep["config"] = config_json(rc);
  rep["dataset"] = dataset_json(ds);
  rep["variant"] = rc.variant;
  rep["split"] = {{"beta", rc.beta},
                  {"split_seed", rc.split_seed},
                  {"test_users", split.test_users.size()},
                  {"train_users", split.train_users.size()}};
  rep["train"] = train_json(tr);
  rep["checkpoint"] = rc.checkpoint;
  write_report(rc.report, rep);
  return 0;
}

struct LoadedCk {
  std::string path;
  std::string variant;
  dacdr::OutputMode mode = dacdr::OutputMode::logit;
  std::unique_ptr<dacdr::Model> model;        // exactly one of these two
  std::unique_ptr<dacdr::Baseline> baseline;  // is non-null
};

LoadedCk load_checkpoint(const std::string& path) {
  LoadedCk ck;
  ck.path = path;
  if (checkpoint_kind(path) == CkKind::model) {
    ck.model = std::make_unique<dacdr::Model>(dacdr::Model::load(path));
    ck.variant = dacdr::to_string(ck.model->config().ablation);
    ck.mode = ck.model->config().output_mode;
  } else {
    ck.baseline = dacdr::load_baseline(path);
    ck.variant = ck.baseline->config().name;
    ck.mode = ck.baseline->config().output_mode;
  }
  return ck;
}

int run_eval(dacdr::RunConfig& rc, std::vector<std::string> paths) {
  if (paths.empty() && !rc.checkpoint.empty()) paths.push_back(rc.checkpoint);
  if (paths.empty())
    throw dacdr::ConfigError("eval needs at least one --checkpoint");
  if (!(rc.beta > 0.0 && rc.beta < 1.0))
    throw dacdr::ConfigError("beta must lie strictly between 0 and 1");
  if (rc.max_seq_len < 1) throw dacdr::ConfigError("max_seq_len must be positive");

  std::vector<LoadedCk> cks;
  cks.reserve(paths.size());
  for (const std::string& p : paths) cks.push_back(load_checkpoint(p));
  for (const LoadedCk& ck : cks)
    if (ck.mode != cks.front().mode)
      throw dacdr::ConfigError(
          "checkpoints mix logit and rating outputs; evaluate them separately");
  const bool rating = cks.front().mode == dacdr::OutputMode::rating;

  dacdr::Dataset ds = load_dataset(rc, rating);

  std::vector<double> betas;
  if (rc.sweep_beta.empty()) {
    betas.push_back(rc.beta);
  } else {
    betas = dacdr::parse_double_list(rc.sweep_beta);
    for (double b : betas)
      if (!(b > 0.0 && b < 1.0))
        throw dacdr::ConfigError(
            "sweep_beta entries must lie strictly between 0 and 1");
  }

  std::printf("%-10s %-24s %6s %10s %10s %8s\n", "variant", "checkpoint", "beta",
              rating ? "mae" : "auc", rating ? "rmse" : "log_loss", "samples");
  json rows = json::array();
  for (double beta : betas) {
    const dacdr::ColdStartSplit split = dacdr::cold_start_split(ds, beta, rc.split_seed);
    for (LoadedCk& ck : cks) {
      dacdr::EvalReport er;
      if (ck.model) {
        check_model_matches(*ck.model, ds);
        // A freshly trained model holds one domain row; adaptation appends a
        // row, so the last one is always the row the checkpoint was fit on.
        const int domain_row = ck.model->sizes().domains - 1;
        er = dacdr::evaluate(*ck.model,
                             dacdr::make_samples(ds, split.test_users, true,
                                                 rc.max_seq_len, rc.causal,
                                                 domain_row));
      } else {
        er = dacdr::evaluate_baseline(
            *ck.baseline, dacdr::make_samples(ds, split.test_users, true,
                                              rc.max_seq_len, rc.causal, 0));
      }

      std::printf("%-10s %-24s %6.2f %10.4f %10.4f %8zu\n", ck.variant.c_str(),
                  basename_of(ck.path).c_str(), beta, rating ? er.mae : er.auc,
                  rating ? er.rmse : er.log_loss, er.samples);
      json row;
      row["variant"] = ck.variant;
      row["checkpoint"] = ck.path;
      row["beta"] = beta;
      row["split_seed"] = rc.split_seed;
      row["samples"] = er.samples;
      if (rating) {
        row["mae"] = er.mae;
        row["rmse"] = er.rmse;
      } else {
        row["auc"] = er.auc;
        row["log_loss"] = er.log_loss;
      }
      rows.push_back(std::move(row));
    }
  }

  json rep;
  rep["command"] = "eval";
  rep["config"] = config_json(rc);
  rep["dataset"] = dataset_json(ds);
  rep["task"] = rating ? "rating" : "logit";
  rep["rows"] = rows;
  write_report(rc.report, rep);
  return 0;
}

int run_finetune(dacdr::RunConfig& rc) {
  if (rc.base.empty())
    throw dacdr::ConfigError("--base checkpoint is required");
  if (checkpoint_kind(rc.base) == CkKind::baseline)
    throw dacdr::ConfigError(
        "finetune requires an attention-model checkpoint; got a baseline");

  dacdr::Model m = dacdr::Model::load(rc.base);
  const bool rating = m.config().output_mode == dacdr::OutputMode::rating;
  dacdr::Dataset ds = load_dataset(rc, rating);
  const dacdr::TableSizes& s = m.sizes();
  if (s.users != ds.users.size() || s.items_src != ds.items_src.size() ||
      s.categories != ds.categories.size())
    throw dacdr::ConfigError(
        "base checkpoint's source-side tables do not match the dataset: users " +
        std::to_string(s.users) + "/" + std::to_string(ds.users.size()) +
        ", src items " + std::to_string(s.items_src) + "/" +
        std::to_string(ds.items_src.size()) + ", categories " +
        std::to_string(s.categories) + "/" + std::to_string(ds.categories.size()));

  dacdr::Rng rng(rc.seed);
  m.register_new_domain(ds.items_tgt.size(), rng);
  const int domain_row = m.sizes().domains - 1;

  const dacdr::ColdStartSplit split =
      dacdr::cold_start_split(ds, rc.beta, rc.split_seed);
  const std::vector<dacdr::SampleInput> samples = dacdr::make_samples(
      ds, split.test_users, false, rc.max_seq_len, rc.causal, domain_row);
  const dacdr::TrainReport tr = dacdr::finetune_model(m, samples, rc.train_config());
  if (!rc.checkpoint.empty()) m.save(rc.checkpoint);

  std::printf("adapted %s to a new domain (row %d, %d items): %zu samples\n",
              basename_of(rc.base).c_str(), domain_row, ds.items_tgt.size(),
              samples.size());
  print_epochs(tr);
  if (!rc.checkpoint.empty())
    std::printf("  checkpoint %s\n", rc.checkpoint.c_str());

  json rep;
  rep["command"] = "finetune";
  rep["config"] = config_json(rc);
  rep["dataset"] = dataset_json(ds);
  rep["base"] = rc.base;
  rep["domain_row"] = domain_row;
  rep["trainable_groups"] = dacdr::kFinetuneTrainable;
  rep["split"] = {{"beta", rc.beta},
                  {"split_seed", rc.split_seed},
                  {"test_users", split.test_users.size()},
                  {"train_users", split.train_users.size()}};
  rep["train"] = train_json(tr);
  rep["checkpoint"] = rc.checkpoint;
  write_report(rc.report, rep);
  return 0;
}

int run_gradcheck(dacdr::RunConfig& rc, double eps,
                  const std::vector<std::string>& ops) {
  std::vector<dacdr::GradCheckRow> rows = dacdr::gradcheck_battery(rc.seed, eps);
  if (!ops.empty()) {
    std::vector<dacdr::GradCheckRow> kept;
    for (const dacdr::GradCheckRow& r : rows)
      if (std::find(ops.begin(), ops.end(), r.name) != ops.end())
        kept.push_back(r);
    if (kept.empty())
      throw dacdr::ConfigError("no gradient check matches the --op filter");
    rows = std::move(kept);
  }

  bool ok = true;
  std::printf("%-26s %13s %9s  status\n", "check", "max_rel_error", "tol");
  for (const dacdr::GradCheckRow& r : rows) {
    std::printf("%-26s %13.3e %9.0e  %s\n", r.name.c_str(), r.max_rel_error,
                r.tol, r.pass ? "pass" : "FAIL");
    ok = ok && r.pass;
  }
  std::printf(ok ? "all %zu gradient checks passed\n"
                 : "%zu gradient checks run, some FAILED\n",
              rows.size());

  json rep;
  rep["command"] = "gradcheck";
  rep["seed"] = rc.seed;
  rep["eps"] = eps;
  rep["pass"] = ok;
  json jr = json::array();
  for (const dacdr::GradCheckRow& r : rows)
    jr.push_back({{"name", r.name},
                  {"max_rel_error", r.max_rel_error},
                  {"tol", r.tol},
                  {"pass", r.pass}});
  rep["rows"] = jr;
  write_report(rc.report, rep);
  return ok ? 0 : 5;
}

int dispatch(int argc, char** argv) {
  dacdr::RunConfig rc;
  apply_config_files(argc, argv, rc);

  CLI::App app{
      "cross-domain recommender: data synthesis, training, cold-start "
      "evaluation, domain adaptation and gradient verification"};
  app.require_subcommand(1);
  std::vector<std::string> config_sink;
  app.add_option("--config", config_sink, "key = value file applied before flags");

  std::vector<std::string> eval_cks;
  std::vector<std::string> ops;
  double eps = 1e-5;

  CLI::App* gen = app.add_subcommand(
      "gen-data", "write a synthetic two-domain interaction log");
  gen->add_option("--config", config_sink, "key = value file applied before flags");
  bind(gen, rc, "--users", "users", "user count");
  bind(gen, rc, "--items-src", "items_src", "source-domain item count");
  bind(gen, rc, "--items-tgt", "items_tgt", "target-domain item count");
  bind(gen, rc, "--overlap", "overlap", "fraction of users active in both domains");
  bind(gen, rc, "--latent-dim", "latent_dim", "taste vector dimension");
  bind(gen, rc, "--shift-deg", "shift_deg",
       "taste rotation between the domains, degrees");
  bind(gen, rc, "--noise", "noise", "label noise scale");
  bind(gen, rc, "--seed", "seed", "generator seed");
  bind(gen, rc, "--categories", "categories", "source item category count");
  bind(gen, rc, "--src-events-min", "src_events_min", "min source events per user");
  bind(gen, rc, "--src-events-max", "src_events_max", "max source events per user");
  bind(gen, rc, "--tgt-events-min", "tgt_events_min", "min target events per user");
  bind(gen, rc, "--tgt-events-max", "tgt_events_max", "max target events per user");
  bind(gen, rc, "--popularity", "popularity", "item exposure skew");
  bind(gen, rc, "--gain", "gain", "label sharpness (logit task)");
  bind(gen, rc, "--rating-scale", "rating_scale", "rating slope (rating task)");
  bind(gen, rc, "--aspects", "aspects",
       "taste axes; 0 keeps smooth gaussian tastes");
  bind(gen, rc, "--active-aspects", "active_aspects", "axes active per user");
  bind(gen, rc, "--tgt-warp", "tgt_warp",
       "cubic bend of the source-to-target taste map, 0..1");
  bind(gen, rc, "--rating-curve", "rating_curve",
       "saturation of the rating response, 0..1 (rating task)");
  bind(gen, rc, "--xor-shift", "xor_shift",
       "target-only affinity shift keyed on the aspect-sign parity");
  bind(gen, rc, "--task", "task", "logit|rating");
  bind(gen, rc, "--out-interactions", "out_interactions", "interaction log path");
  bind(gen, rc, "--out-side", "out_side", "side-info table path");
  bind(gen, rc, "--report", "report", "JSON report path");

  CLI::App* train = app.add_subcommand(
      "train", "train a model or baseline with cold users held out");
  train->add_option("--config", config_sink, "key = value file applied before flags");
  bind_data(train, rc);
  bind_training(train, rc);
  bind(train, rc, "--task", "task", "logit|rating");
  bind(train, rc, "--loss", "loss", "bce|mse (defaults to the task's loss)");
  bind(train, rc, "--variant", "variant",
       "dacdr|full|no_da|no_ia|no_da_ia|dnn_single|dnn_multi|cmf_lite|emcdr_lite");
  bind(train, rc, "--embed-dim", "embed_dim", "embedding width k");
  bind(train, rc, "--attn-dim", "attn_dim", "attention projection width");
  bind(train, rc, "--channels", "channels", "1 (behavior) or 2 (+side info)");
  bind(train, rc, "--encoder-hidden", "encoder_hidden", "encoder widths, comma list");
  bind(train, rc, "--head-hidden", "head_hidden", "head widths, comma list");
  bind(train, rc, "--attention", "attention", "gated|literal");
  bind(train, rc, "--user-transform", "user_transform", "encoder|bridge");
  bind(train, rc, "--bridge-epochs", "bridge_epochs", "emcdr_lite stage-3 epochs");
  bind(train, rc, "--checkpoint", "checkpoint", "write the trained model here");
  bind(train, rc, "--report", "report", "JSON report path");

  CLI::App* ev = app.add_subcommand(
      "eval", "score checkpoints on the held-out cold-start users");
  ev->add_option("--config", config_sink, "key = value file applied before flags");
  bind_data(ev, rc);
  ev->add_option("--checkpoint", eval_cks,
                 "checkpoint to score; repeat for a side-by-side table");
  bind(ev, rc, "--sweep-beta", "sweep_beta",
       "comma list of split fractions to sweep");
  bind(ev, rc, "--report", "report", "JSON report path");

  CLI::App* fine = app.add_subcommand(
      "finetune", "adapt a trained model to a new target domain");
  fine->add_option("--config", config_sink, "key = value file applied before flags");
  bind_data(fine, rc);
  bind_training(fine, rc);
  bind(fine, rc, "--base", "base", "checkpoint of the already trained model");
  bind(fine, rc, "--checkpoint", "checkpoint", "write the adapted model here");
  bind(fine, rc, "--report", "report", "JSON report path");

  CLI::App* gc = app.add_subcommand(
      "gradcheck", "finite-difference verification of every gradient");
  gc->add_option("--config", config_sink, "key = value file applied before flags");
  bind(gc, rc, "--seed", "seed", "fixture seed");
  gc->add_option("--eps", eps, "finite-difference step")->capture_default_str();
  gc->add_option("--op", ops, "run only the named checks (repeatable)");
  bind(gc, rc, "--report", "report", "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (gen->parsed()) return run_gen_data(rc);
  if (train->parsed()) return run_train(rc);
  if (ev->parsed()) return run_eval(rc, eval_cks);
  if (fine->parsed()) return run_finetune(rc);
  return run_gradcheck(rc, eps, ops);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const dacdr::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const dacdr::ArgumentError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const dacdr::IngestError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const dacdr::ProtocolError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const dacdr::MetricError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const dacdr::IndexError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const dacdr::TrainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}
