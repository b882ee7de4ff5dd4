#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dacdr/model.hpp"

namespace dacdr {

// Mean losses over aligned prediction/target vectors.
double bce_loss(const std::vector<double>& p, const std::vector<double>& y);
double bce_logits_loss(const std::vector<double>& z, const std::vector<double>& y);
double mse_loss(const std::vector<double>& pred, const std::vector<double>& target);

enum class OptimizerKind { sgd, adam };
OptimizerKind parse_optimizer(const std::string& s);
std::string to_string(OptimizerKind k);

struct OptConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;  // throws ConfigError
};

// Updates registered parameter groups in place. Trainable groups get gradient
// buffers on registration; frozen groups have theirs removed, which both
// skips the update and keeps backward from touching them. Adam moments share
// one global timestep across all groups.
class Optimizer {
 public:
  explicit Optimizer(const OptConfig& cfg);

  void add_group(const std::string& name, const std::vector<Tensor*>& params,
                 bool trainable);
  // Registers every model group; names listed in `trainable` stay live and
  // the rest are frozen. Unknown names throw ConfigError.
  void add_model(Model& m, const std::vector<std::string>& trainable);

  void zero_grads();
  void check_grads() const;  // TrainError names the offending group
  void step();

  long long steps_taken() const { return t_; }
  const OptConfig& config() const { return cfg_; }

 private:
  struct Slot {
    std::string group;
    Tensor* p = nullptr;
    std::vector<double> m, v;  // Adam moments
  };
  std::vector<Slot> slots_;  // trainable parameters only
  std::vector<std::string> group_names_;
  OptConfig cfg_;
  long long t_ = 0;
};

struct TrainConfig {
  int epochs = 5;
  int batch_size = 16;
  std::uint64_t seed = 1;
  OptConfig opt;
  bool grad_diag = false;  // capture per-group gradient norms each epoch

  void validate() const;  // throws ConfigError
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean sample loss per epoch
  std::size_t samples = 0;
  double wall_seconds = 0.0;
  std::vector<std::map<std::string, double>> grad_norms;  // one map per epoch
};

// Builds one sample's scalar loss node inside the given graph.
using LossBuilder = std::function<Tensor*(Graph&, const SampleInput&)>;

// The shared epoch loop: seeded shuffle per epoch, one fresh graph per
// sample, gradients averaged over the batch, finiteness checked before every
// optimizer step. diag (optional) runs after each epoch while the last
// batch's gradients are still in place.
TrainReport run_epochs(Optimizer& opt, const std::vector<SampleInput>& samples,
                       const TrainConfig& cfg, const LossBuilder& build_loss,
                       const std::function<std::map<std::string, double>()>& diag = {});

// Trains every parameter group of the model on its configured task
// (cross-entropy on logits, or squared error on ratings).
TrainReport train_model(Model& model, const std::vector<SampleInput>& samples,
                        const TrainConfig& cfg);

// The groups that stay trainable during new-domain adaptation.
extern const std::vector<std::string> kFinetuneTrainable;

// Adaptation pass over an already initialized model: only `trainable` groups
// (default kFinetuneTrainable) move; everything else is frozen. The caller
// registers the new domain's rows beforehand.
TrainReport finetune_model(Model& model, const std::vector<SampleInput>& samples,
                           const TrainConfig& cfg,
                           std::vector<std::string> trainable = {});

}  // namespace dacdr
