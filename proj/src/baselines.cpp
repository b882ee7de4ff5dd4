#include "dacdr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "bin_io.hpp"
#include "dacdr/errors.hpp"
#include "dacdr/graph.hpp"

namespace dacdr {

bool is_baseline_variant(const std::string& name) {
  return name == "dnn_single" || name == "dnn_multi" || name == "cmf_lite" ||
         name == "emcdr_lite";
}

void BaselineConfig::validate() const {
  if (!is_baseline_variant(name))
    throw ConfigError("unknown baseline: '" + name + "'");
  if (embed_dim < 1) throw ConfigError("baseline embed_dim must be positive");
  for (int w : hidden)
    if (w < 1) throw ConfigError("baseline hidden widths must be positive");
  if (bridge_epochs < 0) throw ConfigError("bridge_epochs must be non-negative");
  train.validate();
}

namespace {

constexpr char kMagic[8] = {'D', 'A', 'C', 'D', 'R', 'B', 'L', '1'};

// Flat (user, item, label) views for models that do not consume sequences.
std::vector<SampleInput> source_events(const Dataset& ds) {
  std::vector<SampleInput> out;
  out.reserve(ds.src.size());
  for (const Interaction& ev : ds.src) {
    SampleInput s;
    s.user = ev.user;
    s.item = ev.item;
    s.domain = 0;
    s.label = ev.signal;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SampleInput> target_train_events(const Dataset& ds,
                                             const std::vector<int>& test_users,
                                             int domain_row) {
  return make_samples(ds, test_users, false, 1, false, domain_row);
}

double squash_or_clamp(double z, OutputMode mode) {
  return mode == OutputMode::rating ? std::min(5.0, std::max(1.0, z))
                                    : stable_sigmoid(z);
}

LossBuilder scored_loss(OutputMode mode,
                        std::function<Tensor*(Graph&, const SampleInput&)> score) {
  const bool rating = mode == OutputMode::rating;
  return [score = std::move(score), rating](Graph& g, const SampleInput& s) {
    Tensor* z = score(g, s);
    return rating ? g.squared_error(z, s.label) : g.bce_with_logit(z, s.label);
  };
}

void save_mlp(std::ostream& f, const Mlp& mlp) {
  bin::put_u32(f, static_cast<std::uint32_t>(mlp.weights.size()));
  for (std::size_t i = 0; i < mlp.weights.size(); ++i) {
    bin::put_tensor(f, mlp.weights[i]);
    bin::put_tensor(f, mlp.biases[i]);
  }
}

Mlp load_mlp(std::istream& f) {
  const std::uint32_t n = bin::get_u32(f);
  if (n > 64) throw IngestError("checkpoint: implausible layer count");
  Mlp mlp;
  for (std::uint32_t i = 0; i < n; ++i) {
    mlp.weights.push_back(bin::get_tensor(f));
    mlp.biases.push_back(bin::get_tensor(f));
  }
  return mlp;
}

void add_mlp_group(Optimizer& opt, const std::string& name, Mlp& mlp) {
  std::vector<Tensor*> ts;
  for (std::size_t i = 0; i < mlp.weights.size(); ++i) {
    ts.push_back(&mlp.weights[i]);
    ts.push_back(&mlp.biases[i]);
  }
  opt.add_group(name, ts, true);
}

class BaselineBase : public Baseline {
 public:
  explicit BaselineBase(const BaselineConfig& cfg) : cfg_(cfg) {}
  const BaselineConfig& config() const override { return cfg_; }

  void save(const std::string& path) const override {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IngestError("checkpoint: cannot write " + path);
    f.write(kMagic, sizeof kMagic);
    bin::put_u32(f, 1);  // version
    bin::put_string(f, cfg_.name);
    bin::put_string(f, to_string(cfg_.output_mode));
    bin::put_u32(f, static_cast<std::uint32_t>(cfg_.embed_dim));
    bin::put_widths(f, cfg_.hidden);
    save_payload(f);
    if (!f) throw IngestError("checkpoint: write failed for " + path);
  }

  virtual void save_payload(std::ostream& f) const = 0;
  virtual void load_payload(std::istream& f) = 0;

 protected:
  void require_ready() const {
    if (!ready_) throw StateError("baseline '" + cfg_.name + "' is not fitted");
  }

  BaselineConfig cfg_;
  bool ready_ = false;
};

// Target-domain MLP over user/item/domain embeddings. No source-side signal
// reaches it, so held-out users score with untrained embeddings.
class DnnSingle : public BaselineBase {
 public:
  using BaselineBase::BaselineBase;

  TrainReport fit(const Dataset& ds, const std::vector<int>& test_users) override {
    const int k = cfg_.embed_dim;
    Rng rng(cfg_.init_seed);
    user_ = Tensor::uniform(ds.users.size(), k, -0.1, 0.1, rng);
    item_ = Tensor::uniform(ds.items_tgt.size(), k, -0.1, 0.1, rng);
    dom_ = Tensor::uniform(1, k, -0.1, 0.1, rng);
    mlp_ = make_mlp(3 * k, cfg_.hidden, 1, rng);

    Optimizer opt(cfg_.train.opt);
    opt.add_group("user_table", {&user_}, true);
    opt.add_group("item_table_tgt", {&item_}, true);
    opt.add_group("domain_table", {&dom_}, true);
    add_mlp_group(opt, "mlp", mlp_);

    const std::vector<SampleInput> samples = target_train_events(ds, test_users, 0);
    TrainReport r = run_epochs(opt, samples, cfg_.train,
                               scored_loss(cfg_.output_mode,
                                           [this](Graph& g, const SampleInput& s) {
                                             return score(g, s);
                                           }));
    ready_ = true;
    return r;
  }

  std::vector<double> predict(const std::vector<SampleInput>& samples) override {
    require_ready();
    std::vector<double> out;
    out.reserve(samples.size());
    for (const SampleInput& s : samples) {
      Graph g;
      out.push_back(squash_or_clamp(score(g, s)->data()[0], cfg_.output_mode));
    }
    return out;
  }

  void save_payload(std::ostream& f) const override {
    bin::put_tensor(f, user_);
    bin::put_tensor(f, item_);
    bin::put_tensor(f, dom_);
    save_mlp(f, mlp_);
  }

  void load_payload(std::istream& f) override {
    user_ = bin::get_tensor(f);
    item_ = bin::get_tensor(f);
    dom_ = bin::get_tensor(f);
    mlp_ = load_mlp(f);
    ready_ = true;
  }

 private:
  Tensor* score(Graph& g, const SampleInput& s) {
    Tensor* u = g.lookup(&user_, {s.user});
    Tensor* v = g.lookup(&item_, {s.item});
    Tensor* d = g.lookup(&dom_, {0});
    return mlp_forward(g, mlp_, g.concat_cols({u, v, d}));
  }

  Tensor user_, item_, dom_;
  Mlp mlp_;
};

// The same head with a shared user table trained on both domains, so source
// behaviour shapes the representation that cold users bring to the target.
class DnnMulti : public BaselineBase {
 public:
  using BaselineBase::BaselineBase;

  TrainReport fit(const Dataset& ds, const std::vector<int>& test_users) override {
    const int k = cfg_.embed_dim;
    Rng rng(cfg_.init_seed);
    user_ = Tensor::uniform(ds.users.size(), k, -0.1, 0.1, rng);
    item_src_ = Tensor::uniform(ds.items_src.size(), k, -0.1, 0.1, rng);
    item_tgt_ = Tensor::uniform(ds.items_tgt.size(), k, -0.1, 0.1, rng);
    dom_ = Tensor::uniform(2, k, -0.1, 0.1, rng);
    mlp_ = make_mlp(3 * k, cfg_.hidden, 1, rng);

    Optimizer opt(cfg_.train.opt);
    opt.add_group("user_table", {&user_}, true);
    opt.add_group("item_table_src", {&item_src_}, true);
    opt.add_group("item_table_tgt", {&item_tgt_}, true);
    opt.add_group("domain_table", {&dom_}, true);
    add_mlp_group(opt, "mlp", mlp_);

    std::vector<SampleInput> samples = source_events(ds);
    const std::vector<SampleInput> tgt = target_train_events(ds, test_users, 1);
    samples.insert(samples.end(), tgt.begin(), tgt.end());

    TrainReport r = run_epochs(opt, samples, cfg_.train,
                               scored_loss(cfg_.output_mode,
                                           [this](Graph& g, const SampleInput& s) {
                                             return score(g, s, s.domain);
                                           }));
    ready_ = true;
    return r;
  }

  std::vector<double> predict(const std::vector<SampleInput>& samples) override {
    require_ready();
    std::vector<double> out;
    out.reserve(samples.size());
    for (const SampleInput& s : samples) {
      Graph g;
      out.push_back(
          squash_or_clamp(score(g, s, 1)->data()[0], cfg_.output_mode));
    }
    return out;
  }

  void save_payload(std::ostream& f) const override {
    bin::put_tensor(f, user_);
    bin::put_tensor(f, item_src_);
    bin::put_tensor(f, item_tgt_);
    bin::put_tensor(f, dom_);
    save_mlp(f, mlp_);
  }

  void load_payload(std::istream& f) override {
    user_ = bin::get_tensor(f);
    item_src_ = bin::get_tensor(f);
    item_tgt_ = bin::get_tensor(f);
    dom_ = bin::get_tensor(f);
    mlp_ = load_mlp(f);
    ready_ = true;
  }

 private:
  Tensor* score(Graph& g, const SampleInput& s, int domain) {
    Tensor* u = g.lookup(&user_, {s.user});
    Tensor* v = g.lookup(domain == 0 ? &item_src_ : &item_tgt_, {s.item});
    Tensor* d = g.lookup(&dom_, {domain});
    return mlp_forward(g, mlp_, g.concat_cols({u, v, d}));
  }

  Tensor user_, item_src_, item_tgt_, dom_;
  Mlp mlp_;
};

// Collective matrix factorization: one user vector serves both domains, each
// domain has its own item vectors, biases and offset.
class CmfLite : public BaselineBase {
 public:
  using BaselineBase::BaselineBase;

  TrainReport fit(const Dataset& ds, const std::vector<int>& test_users) override {
    const int k = cfg_.embed_dim;
    Rng rng(cfg_.init_seed);
    user_ = Tensor::uniform(ds.users.size(), k, -0.1, 0.1, rng);
    item_src_ = Tensor::uniform(ds.items_src.size(), k, -0.1, 0.1, rng);
    item_tgt_ = Tensor::uniform(ds.items_tgt.size(), k, -0.1, 0.1, rng);
    bias_user_ = Tensor::zeros(ds.users.size(), 1);
    bias_src_ = Tensor::zeros(ds.items_src.size(), 1);
    bias_tgt_ = Tensor::zeros(ds.items_tgt.size(), 1);
    offset_ = cfg_.output_mode == OutputMode::rating ? Tensor::full(2, 1, 3.0)
                                                     : Tensor::zeros(2, 1);

    Optimizer opt(cfg_.train.opt);
    opt.add_group("user_table", {&user_, &bias_user_}, true);
    opt.add_group("item_table_src", {&item_src_, &bias_src_}, true);
    opt.add_group("item_table_tgt", {&item_tgt_, &bias_tgt_}, true);
    opt.add_group("offsets", {&offset_}, true);

    std::vector<SampleInput> samples = source_events(ds);
    const std::vector<SampleInput> tgt = target_train_events(ds, test_users, 1);
    samples.insert(samples.end(), tgt.begin(), tgt.end());

    TrainReport r = run_epochs(opt, samples, cfg_.train,
                               scored_loss(cfg_.output_mode,
                                           [this](Graph& g, const SampleInput& s) {
                                             return score(g, s, s.domain);
                                           }));
    ready_ = true;
    return r;
  }

  std::vector<double> predict(const std::vector<SampleInput>& samples) override {
    require_ready();
    std::vector<double> out;
    out.reserve(samples.size());
    for (const SampleInput& s : samples) {
      Graph g;
      out.push_back(
          squash_or_clamp(score(g, s, 1)->data()[0], cfg_.output_mode));
    }
    return out;
  }

  void save_payload(std::ostream& f) const override {
    bin::put_tensor(f, user_);
    bin::put_tensor(f, item_src_);
    bin::put_tensor(f, item_tgt_);
    bin::put_tensor(f, bias_user_);
    bin::put_tensor(f, bias_src_);
    bin::put_tensor(f, bias_tgt_);
    bin::put_tensor(f, offset_);
  }

  void load_payload(std::istream& f) override {
    user_ = bin::get_tensor(f);
    item_src_ = bin::get_tensor(f);
    item_tgt_ = bin::get_tensor(f);
    bias_user_ = bin::get_tensor(f);
    bias_src_ = bin::get_tensor(f);
    bias_tgt_ = bin::get_tensor(f);
    offset_ = bin::get_tensor(f);
    ready_ = true;
  }

 private:
  Tensor* score(Graph& g, const SampleInput& s, int domain) {
    Tensor* u = g.lookup(&user_, {s.user});
    Tensor* v = g.lookup(domain == 0 ? &item_src_ : &item_tgt_, {s.item});
    Tensor* dot = g.sum(g.hadamard(u, v));
    Tensor* bu = g.lookup(&bias_user_, {s.user});
    Tensor* bi = g.lookup(domain == 0 ? &bias_src_ : &bias_tgt_, {s.item});
    Tensor* mu = g.lookup(&offset_, {domain});
    return g.add(g.add(dot, bu), g.add(bi, mu));
  }

  Tensor user_, item_src_, item_tgt_;
  Tensor bias_user_, bias_src_, bias_tgt_, offset_;
};

// Three stages: factorize the source log, factorize the target training log,
// then fit a linear bridge between the user spaces on the users present in
// both. Cold users are scored through the bridged source vector.
class EmcdrLite : public BaselineBase {
 public:
  using BaselineBase::BaselineBase;

  TrainReport fit(const Dataset& ds, const std::vector<int>& test_users) override {
    const int k = cfg_.embed_dim;
    Rng rng(cfg_.init_seed);
    user_src_ = Tensor::uniform(ds.users.size(), k, -0.1, 0.1, rng);
    item_src_ = Tensor::uniform(ds.items_src.size(), k, -0.1, 0.1, rng);
    bias_src_ = Tensor::zeros(ds.items_src.size(), 1);
    user_tgt_ = Tensor::uniform(ds.users.size(), k, -0.1, 0.1, rng);
    item_tgt_ = Tensor::uniform(ds.items_tgt.size(), k, -0.1, 0.1, rng);
    bias_tgt_ = Tensor::zeros(ds.items_tgt.size(), 1);
    const double prior = cfg_.output_mode == OutputMode::rating ? 3.0 : 0.0;
    offset_src_ = Tensor::full(1, 1, prior);
    offset_tgt_ = Tensor::full(1, 1, prior);
    bridge_ = Tensor::identity(k);
    warm_ = Tensor::zeros(ds.users.size(), 1);

    // stage 1: source-domain factorization
    {
      Optimizer opt(cfg_.train.opt);
      opt.add_group("mf_src", {&user_src_, &item_src_, &bias_src_, &offset_src_},
                    true);
      run_epochs(opt, source_events(ds), cfg_.train,
                 scored_loss(cfg_.output_mode, [this](Graph& g, const SampleInput& s) {
                   return mf_score(g, s, user_src_, item_src_, bias_src_, offset_src_);
                 }));
    }

    // stage 2: target-domain factorization on the training side only
    const std::vector<SampleInput> tgt = target_train_events(ds, test_users, 1);
    for (const SampleInput& s : tgt) warm_.at(s.user, 0) = 1.0;
    {
      Optimizer opt(cfg_.train.opt);
      opt.add_group("mf_tgt", {&user_tgt_, &item_tgt_, &bias_tgt_, &offset_tgt_},
                    true);
      run_epochs(opt, tgt, cfg_.train,
                 scored_loss(cfg_.output_mode, [this](Graph& g, const SampleInput& s) {
                   return mf_score(g, s, user_tgt_, item_tgt_, bias_tgt_, offset_tgt_);
                 }));
    }

    // stage 3: linear bridge fitted on users factorized in both domains
    for (Tensor* t : {&user_src_, &item_src_, &bias_src_, &offset_src_,
                      &user_tgt_, &item_tgt_, &bias_tgt_, &offset_tgt_})
      t->disable_grad();
    std::vector<char> has_src(static_cast<std::size_t>(ds.users.size()), 0);
    for (const Interaction& ev : ds.src) has_src[ev.user] = 1;
    std::vector<SampleInput> pairs;
    for (int u = 0; u < ds.users.size(); ++u)
      if (has_src[u] && warm_.at(u, 0) == 1.0) {
        SampleInput s;
        s.user = u;
        pairs.push_back(std::move(s));
      }
    if (pairs.empty())
      throw TrainError("emcdr_lite: no users shared between the source log and "
                       "the target training split");

    Optimizer opt(cfg_.train.opt);
    opt.add_group("bridge", {&bridge_}, true);
    TrainConfig bridge_cfg = cfg_.train;
    bridge_cfg.epochs = cfg_.bridge_epochs;
    TrainReport r =
        run_epochs(opt, pairs, bridge_cfg, [this](Graph& g, const SampleInput& s) {
          Tensor* mapped = g.matmul(g.lookup(&user_src_, {s.user}), &bridge_);
          Tensor* diff = g.sub(mapped, g.lookup(&user_tgt_, {s.user}));
          return g.sum(g.hadamard(diff, diff));
        });
    ready_ = true;
    return r;
  }

  std::vector<double> predict(const std::vector<SampleInput>& samples) override {
    require_ready();
    const int k = user_src_.cols();
    std::vector<double> out;
    out.reserve(samples.size());
    std::vector<double> u(static_cast<std::size_t>(k));
    for (const SampleInput& s : samples) {
      if (s.user < 0 || s.user >= user_src_.rows() || s.item < 0 ||
          s.item >= item_tgt_.rows())
        throw ArgumentError("emcdr_lite: sample index out of range");
      if (warm_.at(s.user, 0) == 1.0) {
        for (int c = 0; c < k; ++c) u[c] = user_tgt_.at(s.user, c);
      } else {
        for (int c = 0; c < k; ++c) {
          double acc = 0.0;
          for (int d = 0; d < k; ++d) acc += user_src_.at(s.user, d) * bridge_.at(d, c);
          u[c] = acc;
        }
      }
      double z = offset_tgt_.at(0, 0) + bias_tgt_.at(s.item, 0);
      for (int c = 0; c < k; ++c) z += u[c] * item_tgt_.at(s.item, c);
      out.push_back(squash_or_clamp(z, cfg_.output_mode));
    }
    return out;
  }

  void save_payload(std::ostream& f) const override {
    for (const Tensor* t : {&user_src_, &item_src_, &bias_src_, &offset_src_,
                            &user_tgt_, &item_tgt_, &bias_tgt_, &offset_tgt_,
                            &bridge_, &warm_})
      bin::put_tensor(f, *t);
  }

  void load_payload(std::istream& f) override {
    for (Tensor* t : {&user_src_, &item_src_, &bias_src_, &offset_src_,
                      &user_tgt_, &item_tgt_, &bias_tgt_, &offset_tgt_,
                      &bridge_, &warm_})
      *t = bin::get_tensor(f);
    ready_ = true;
  }

 private:
  Tensor* mf_score(Graph& g, const SampleInput& s, Tensor& users, Tensor& items,
                   Tensor& bias, Tensor& offset) {
    Tensor* dot = g.sum(g.hadamard(g.lookup(&users, {s.user}),
                                   g.lookup(&items, {s.item})));
    return g.add(g.add(dot, g.lookup(&bias, {s.item})), g.lookup(&offset, {0}));
  }

  Tensor user_src_, item_src_, bias_src_, offset_src_;
  Tensor user_tgt_, item_tgt_, bias_tgt_, offset_tgt_;
  Tensor bridge_, warm_;
};

}  // namespace

std::unique_ptr<Baseline> make_baseline(const BaselineConfig& cfg) {
  cfg.validate();
  if (cfg.name == "dnn_single") return std::make_unique<DnnSingle>(cfg);
  if (cfg.name == "dnn_multi") return std::make_unique<DnnMulti>(cfg);
  if (cfg.name == "cmf_lite") return std::make_unique<CmfLite>(cfg);
  return std::make_unique<EmcdrLite>(cfg);
}

std::unique_ptr<Baseline> load_baseline(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IngestError("checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IngestError("checkpoint: bad magic in " + path);
  if (bin::get_u32(f) != 1) throw IngestError("checkpoint: unsupported version");

  BaselineConfig cfg;
  cfg.name = bin::get_string(f);
  cfg.output_mode = parse_output_mode(bin::get_string(f));
  cfg.embed_dim = static_cast<int>(bin::get_u32(f));
  cfg.hidden = bin::get_widths(f);
  std::unique_ptr<Baseline> b = make_baseline(cfg);
  static_cast<BaselineBase*>(b.get())->load_payload(f);
  return b;
}

EvalReport evaluate_baseline(Baseline& b, const std::vector<SampleInput>& samples) {
  if (samples.empty()) throw MetricError("evaluate: no samples");
  std::vector<double> labels;
  labels.reserve(samples.size());
  for (const SampleInput& s : samples) labels.push_back(s.label);
  const bool rating = b.config().output_mode == OutputMode::rating;
  return report_from_predictions(rating ? "rating" : "logit", b.predict(samples),
                                 labels);
}

}  // namespace dacdr
