#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dacdr/data.hpp"
#include "dacdr/evaluation.hpp"
#include "dacdr/training.hpp"

namespace dacdr {

// Reference systems the attention model is compared against:
//   dnn_single  target-domain MLP over user/item/domain embeddings
//   dnn_multi   the same head with a user table shared across both domains
//   cmf_lite    matrix factorization with collectively trained user vectors
//   emcdr_lite  source MF, target MF, then a learned linear bridge between
//               the two user spaces, applied to cold users at prediction time
bool is_baseline_variant(const std::string& name);

struct BaselineConfig {
  std::string name = "dnn_single";
  int embed_dim = 16;
  std::vector<int> hidden{64, 32};  // dnn head widths
  OutputMode output_mode = OutputMode::logit;
  std::uint64_t init_seed = 7;
  TrainConfig train;
  int bridge_epochs = 80;  // emcdr stage-3 budget

  void validate() const;  // throws ConfigError
};

class Baseline {
 public:
  virtual ~Baseline() = default;

  virtual const BaselineConfig& config() const = 0;

  // Trains on the source log plus the target events of everyone except the
  // held-out users. Returns the (final-stage) training report.
  virtual TrainReport fit(const Dataset& ds, const std::vector<int>& test_users) = 0;

  // Target-domain predictions: probabilities (logit) or clamped ratings.
  virtual std::vector<double> predict(const std::vector<SampleInput>& samples) = 0;

  virtual void save(const std::string& path) const = 0;
};

std::unique_ptr<Baseline> make_baseline(const BaselineConfig& cfg);
std::unique_ptr<Baseline> load_baseline(const std::string& path);

EvalReport evaluate_baseline(Baseline& b, const std::vector<SampleInput>& samples);

}  // namespace dacdr
