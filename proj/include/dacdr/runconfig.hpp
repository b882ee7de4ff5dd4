#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dacdr/baselines.hpp"
#include "dacdr/data.hpp"
#include "dacdr/model.hpp"
#include "dacdr/training.hpp"

namespace dacdr {

// Flat experiment configuration shared by every subcommand. Values come from
// a `key = value` file (optional, `#` comments) overridden by command-line
// flags; unknown keys are rejected so typos fail loudly. The resolved values
// are echoed into every report.
struct RunConfig {
  // data
  std::string interactions;
  std::string side_info;
  std::string task = "logit";  // logit | rating
  std::string loss;            // bce | mse; empty derives from task
  int max_seq_len = 50;
  bool causal = true;

  // cold-start split
  double beta = 0.5;
  std::uint64_t split_seed = 1;
  std::string sweep_beta;  // comma list for eval sweeps

  // model
  std::string variant = "dacdr";
  int embed_dim = 16;
  int attn_dim = 16;
  int channels = 2;
  std::vector<int> encoder_hidden{64, 32};
  std::vector<int> head_hidden{64, 32};
  std::string attention = "gated";
  std::string user_transform = "encoder";

  // training
  int epochs = 5;
  int batch_size = 16;
  double lr = 1e-3;
  std::string optimizer = "adam";
  std::uint64_t seed = 1;
  bool grad_diag = false;
  int bridge_epochs = 80;

  // artifacts
  std::string checkpoint;
  std::string report;
  std::string base;  // finetune input checkpoint

  // synthesis
  int users = 1000;
  int items_src = 800;
  int items_tgt = 400;
  double overlap = 0.8;
  int latent_dim = 8;
  double shift_deg = 0.0;
  double noise = 0.3;
  int categories = 12;
  int src_events_min = 10;
  int src_events_max = 30;
  int tgt_events_min = 4;
  int tgt_events_max = 12;
  double popularity = 0.7;
  double gain = 3.5;
  double rating_scale = 1.8;
  int aspects = 0;
  int active_aspects = 2;
  double tgt_warp = 0.0;
  double rating_curve = 0.0;
  double xor_shift = 0.0;
  std::string out_interactions = "interactions.tsv";
  std::string out_side = "side_info.tsv";

  // Applies one key; throws ConfigError on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);

  // Cross-field checks (task/loss pairing, known variant, beta range, ...).
  void validate() const;

  bool rating_mode() const { return task == "rating"; }
  std::string effective_loss() const;
  bool is_baseline() const { return is_baseline_variant(variant); }

  ModelConfig model_config() const;        // attention-model variants only
  BaselineConfig baseline_config() const;  // baseline variants only
  TrainConfig train_config() const;
  SynthSpec synth_spec() const;

  // Every key with its resolved value, for the report echo.
  std::map<std::string, std::string> echo() const;
};

// "0.2,0.5,0.8" -> {0.2, 0.5, 0.8}; throws ConfigError on junk.
std::vector<double> parse_double_list(const std::string& csv);
std::vector<int> parse_int_list(const std::string& csv);

}  // namespace dacdr
