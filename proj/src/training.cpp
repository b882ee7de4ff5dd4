#include "dacdr/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "dacdr/errors.hpp"

namespace dacdr {

namespace {

void require_aligned(const std::vector<double>& a, const std::vector<double>& b,
                     const char* who) {
  if (a.empty() || a.size() != b.size())
    throw ArgumentError(std::string(who) +
                        ": inputs must be non-empty and equally sized");
}

}  // namespace

double bce_loss(const std::vector<double>& p, const std::vector<double>& y) {
  require_aligned(p, y, "bce_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = std::min(1.0 - 1e-12, std::max(1e-12, p[i]));
    total += -(y[i] * std::log(pi) + (1.0 - y[i]) * std::log(1.0 - pi));
  }
  return total / static_cast<double>(p.size());
}

double bce_logits_loss(const std::vector<double>& z, const std::vector<double>& y) {
  require_aligned(z, y, "bce_logits_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    total += std::max(z[i], 0.0) - z[i] * y[i] + std::log1p(std::exp(-std::fabs(z[i])));
  return total / static_cast<double>(z.size());
}

double mse_loss(const std::vector<double>& pred, const std::vector<double>& target) {
  require_aligned(pred, target, "mse_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    total += d * d;
  }
  return total / static_cast<double>(pred.size());
}

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer: '" + s + "' (expected sgd or adam)");
}

std::string to_string(OptimizerKind k) {
  return k == OptimizerKind::sgd ? "sgd" : "adam";
}

void OptConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr))
    throw ConfigError("optimizer lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("adam betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adam eps must be positive");
}

Optimizer::Optimizer(const OptConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

void Optimizer::add_group(const std::string& name,
                          const std::vector<Tensor*>& params, bool trainable) {
  for (const std::string& existing : group_names_)
    if (existing == name)
      throw ConfigError("parameter group registered twice: '" + name + "'");
  group_names_.push_back(name);
  for (Tensor* p : params) {
    if (p == nullptr) throw ArgumentError("Optimizer::add_group: null parameter");
    if (!trainable) {
      p->disable_grad();
      continue;
    }
    p->enable_grad();
    Slot s;
    s.group = name;
    s.p = p;
    if (cfg_.kind == OptimizerKind::adam) {
      s.m.assign(p->size(), 0.0);
      s.v.assign(p->size(), 0.0);
    }
    slots_.push_back(std::move(s));
  }
}

void Optimizer::add_model(Model& m, const std::vector<std::string>& trainable) {
  std::vector<ParamGroup> gs = m.groups();
  for (const std::string& want : trainable) {
    bool known = false;
    for (const ParamGroup& g : gs) known = known || g.name == want;
    if (!known) throw ConfigError("unknown parameter group: '" + want + "'");
  }
  for (ParamGroup& g : gs) {
    const bool live =
        std::find(trainable.begin(), trainable.end(), g.name) != trainable.end();
    add_group(g.name, g.tensors, live);
  }
}

void Optimizer::zero_grads() {
  for (Slot& s : slots_) s.p->zero_grad();
}

void Optimizer::check_grads() const {
  for (const Slot& s : slots_)
    for (double g : s.p->grad_values())
      if (!std::isfinite(g))
        throw TrainError("non-finite gradient in group '" + s.group + "'");
}

void Optimizer::step() {
  ++t_;
  if (cfg_.kind == OptimizerKind::sgd) {
    for (Slot& s : slots_) {
      double* p = s.p->data();
      const double* g = s.p->grad();
      for (std::size_t i = 0; i < s.p->size(); ++i) p[i] -= cfg_.lr * g[i];
    }
    return;
  }
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Slot& s : slots_) {
    double* p = s.p->data();
    const double* g = s.p->grad();
    for (std::size_t i = 0; i < s.p->size(); ++i) {
      s.m[i] = cfg_.beta1 * s.m[i] + (1.0 - cfg_.beta1) * g[i];
      s.v[i] = cfg_.beta2 * s.v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double m_hat = s.m[i] / bc1;
      const double v_hat = s.v[i] / bc2;
      p[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  opt.validate();
}

TrainReport run_epochs(Optimizer& opt, const std::vector<SampleInput>& samples,
                       const TrainConfig& cfg, const LossBuilder& build_loss,
                       const std::function<std::map<std::string, double>()>& diag) {
  cfg.validate();
  if (samples.empty() && cfg.epochs > 0)
    throw TrainError("no training samples");

  const auto start = std::chrono::steady_clock::now();
  TrainReport report;
  report.samples = samples.size();

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t n_b =
          std::min(order.size() - at, static_cast<std::size_t>(cfg.batch_size));
      opt.zero_grads();
      for (std::size_t b = 0; b < n_b; ++b) {
        Graph g;
        Tensor* loss = build_loss(g, samples[order[at + b]]);
        const double value = loss->data()[0];
        if (!std::isfinite(value)) throw TrainError("non-finite training loss");
        total += value;
        g.backward(loss, 1.0 / static_cast<double>(n_b));
      }
      opt.check_grads();
      opt.step();
    }
    report.epoch_loss.push_back(total / static_cast<double>(samples.size()));
    if (diag) report.grad_norms.push_back(diag());
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

LossBuilder task_loss(Model& model) {
  const bool rating = model.config().output_mode == OutputMode::rating;
  return [&model, rating](Graph& g, const SampleInput& s) -> Tensor* {
    Tensor* z = model.forward(g, s, nullptr);
    return rating ? g.squared_error(z, s.label) : g.bce_with_logit(z, s.label);
  };
}

std::vector<std::string> group_names(Model& m) {
  std::vector<std::string> names;
  for (const ParamGroup& g : m.groups()) names.push_back(g.name);
  return names;
}

}  // namespace

TrainReport train_model(Model& model, const std::vector<SampleInput>& samples,
                        const TrainConfig& cfg) {
  Optimizer opt(cfg.opt);
  opt.add_model(model, group_names(model));
  std::function<std::map<std::string, double>()> diag;
  if (cfg.grad_diag) diag = [&model] { return gradient_norm_report(model); };
  return run_epochs(opt, samples, cfg, task_loss(model), diag);
}

const std::vector<std::string> kFinetuneTrainable = {"domain_table",
                                                     "item_table_tgt", "attention"};

TrainReport finetune_model(Model& model, const std::vector<SampleInput>& samples,
                           const TrainConfig& cfg,
                           std::vector<std::string> trainable) {
  if (trainable.empty()) trainable = kFinetuneTrainable;
  Optimizer opt(cfg.opt);
  opt.add_model(model, trainable);
  std::function<std::map<std::string, double>()> diag;
  if (cfg.grad_diag) diag = [&model] { return gradient_norm_report(model); };
  return run_epochs(opt, samples, cfg, task_loss(model), diag);
}

}  // namespace dacdr
