#include <cmath>
#include <cstring>
#include <vector>

#include "dacdr/training.hpp"
#include "doctest.h"

using namespace dacdr;

namespace {

Model small_model(OutputMode mode = OutputMode::logit, std::uint64_t seed = 7) {
  ModelConfig cfg;
  cfg.embed_dim = 4;
  cfg.attn_dim = 4;
  cfg.encoder_hidden = {8};
  cfg.head_hidden = {8};
  cfg.output_mode = mode;
  TableSizes sizes;
  sizes.users = 6;
  sizes.items_src = 8;
  sizes.items_tgt = 5;
  sizes.categories = 4;
  sizes.domains = 1;
  Rng rng(seed);
  return Model(cfg, sizes, rng);
}

// Labels follow one latent direction of the item id so a small model can
// separate them: even items are positive for even users.
std::vector<SampleInput> toy_samples(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SampleInput> out;
  for (int i = 0; i < n; ++i) {
    SampleInput s;
    const int len = 1 + static_cast<int>(rng.below(4));
    for (int j = 0; j < len; ++j) {
      s.behavior.push_back(static_cast<int>(rng.below(8)));
      s.side.push_back(static_cast<int>(rng.below(4)));
    }
    s.user = static_cast<int>(rng.below(6));
    s.item = static_cast<int>(rng.below(5));
    s.domain = 0;
    s.label = ((s.user + s.item) % 2 == 0) ? 1.0 : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

bool same_bits(const Tensor& a, const Tensor& b) {
  return a.same_shape(b) &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("loss functions") {
  SUBCASE("cross-entropy fixture") {
    const double got = bce_loss({0.8, 0.8}, {1.0, 0.0});
    const double want = -(std::log(0.8) + std::log(0.2)) / 2.0;
    CHECK(got == doctest::Approx(want).epsilon(1e-14));
  }

  SUBCASE("logit form agrees with the probability form") {
    const std::vector<double> p = {0.8, 0.25, 0.5, 0.9};
    const std::vector<double> y = {1.0, 0.0, 1.0, 0.0};
    std::vector<double> z;
    for (double pi : p) z.push_back(std::log(pi / (1.0 - pi)));
    CHECK(bce_logits_loss(z, y) == doctest::Approx(bce_loss(p, y)).epsilon(1e-12));
  }

  SUBCASE("logit form stays finite at extreme scores") {
    const double hi = bce_logits_loss({1000.0}, {0.0});
    const double lo = bce_logits_loss({-1000.0}, {1.0});
    CHECK(std::isfinite(hi));
    CHECK(hi == doctest::Approx(1000.0));
    CHECK(std::isfinite(lo));
    CHECK(bce_logits_loss({1000.0}, {1.0}) == doctest::Approx(0.0));
  }

  SUBCASE("squared-error fixture") {
    CHECK(mse_loss({0.0, 0.0}, {1.0, 3.0}) == 5.0);
  }

  SUBCASE("misaligned inputs are rejected") {
    CHECK_THROWS_AS(bce_loss({0.5}, {1.0, 0.0}), ArgumentError);
    CHECK_THROWS_AS(mse_loss({}, {}), ArgumentError);
  }
}

TEST_CASE("optimizer configuration") {
  CHECK(parse_optimizer("sgd") == OptimizerKind::sgd);
  CHECK(parse_optimizer("adam") == OptimizerKind::adam);
  CHECK_THROWS_AS(parse_optimizer("rmsprop"), ConfigError);
  CHECK(to_string(OptimizerKind::adam) == "adam");

  OptConfig bad;
  bad.lr = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.beta2 = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("sgd step") {
  Tensor w = Tensor::from_rows({{1.0, 2.0}});
  OptConfig oc;
  oc.kind = OptimizerKind::sgd;
  oc.lr = 0.1;
  Optimizer opt(oc);
  opt.add_group("w", {&w}, true);
  w.grad()[0] = 0.5;
  w.grad()[1] = -1.0;
  opt.step();
  CHECK(w.at(0, 0) == doctest::Approx(0.95));
  CHECK(w.at(0, 1) == doctest::Approx(2.1));
  CHECK(opt.steps_taken() == 1);
}

TEST_CASE("adam first step moves by about the learning rate") {
  Tensor w = Tensor::from_rows({{0.0, 0.0, 0.0}});
  OptConfig oc;
  oc.kind = OptimizerKind::adam;
  oc.lr = 0.001;
  Optimizer opt(oc);
  opt.add_group("w", {&w}, true);
  w.grad()[0] = 0.3;
  w.grad()[1] = -40.0;
  w.grad()[2] = 1e-3;
  opt.step();
  // bias correction makes the first update lr * g / (|g| + eps)
  CHECK(w.at(0, 0) == doctest::Approx(-0.001).epsilon(1e-6));
  CHECK(w.at(0, 1) == doctest::Approx(0.001).epsilon(1e-6));
  CHECK(w.at(0, 2) == doctest::Approx(-0.001).epsilon(1e-4));
}

TEST_CASE("adam trajectories are bit-reproducible") {
  auto run = [] {
    Tensor w = Tensor::from_rows({{0.2, -0.4}});
    OptConfig oc;
    oc.lr = 0.01;
    Optimizer opt(oc);
    opt.add_group("w", {&w}, true);
    Rng rng(3);
    for (int i = 0; i < 25; ++i) {
      w.zero_grad();
      w.grad()[0] = rng.gaussian();
      w.grad()[1] = rng.gaussian();
      opt.step();
    }
    return std::vector<double>(w.values());
  };
  const std::vector<double> a = run(), b = run();
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("gradient sanity checks name the failing group") {
  Tensor w = Tensor::from_rows({{1.0}});
  Tensor u = Tensor::from_rows({{1.0}});
  Optimizer opt(OptConfig{});
  opt.add_group("healthy", {&w}, true);
  opt.add_group("broken", {&u}, true);
  w.grad()[0] = 1.0;
  u.grad()[0] = std::nan("");
  CHECK_THROWS_WITH_AS(opt.check_grads(), doctest::Contains("broken"), TrainError);
  u.grad()[0] = 1.0;
  CHECK_NOTHROW(opt.check_grads());

  CHECK_THROWS_AS(opt.add_group("healthy", {&w}, true), ConfigError);
}

TEST_CASE("model registration controls freezing") {
  Model m = small_model();
  Optimizer opt(OptConfig{});
  CHECK_THROWS_AS(opt.add_model(m, {"no_such_group"}), ConfigError);

  Optimizer opt2(OptConfig{});
  opt2.add_model(m, kFinetuneTrainable);
  CHECK(m.domain_table.tracks_grad());
  CHECK(m.item_table_tgt.tracks_grad());
  CHECK(m.attn1[0].wq.tracks_grad());
  CHECK_FALSE(m.user_table_src.tracks_grad());
  CHECK_FALSE(m.encoder.weights[0].tracks_grad());
}

TEST_CASE("epoch loop") {
  SUBCASE("zero epochs is a no-op") {
    Tensor w = Tensor::from_rows({{1.0}});
    Optimizer opt(OptConfig{});
    opt.add_group("w", {&w}, true);
    TrainConfig cfg;
    cfg.epochs = 0;
    TrainReport r = run_epochs(opt, toy_samples(4, 1), cfg,
                               [&w](Graph& g, const SampleInput&) {
                                 return g.squared_error(&w, 0.0);
                               });
    CHECK(r.epoch_loss.empty());
    CHECK(w.at(0, 0) == 1.0);
    CHECK(opt.steps_taken() == 0);
  }

  SUBCASE("training with no samples is an error") {
    Tensor w = Tensor::from_rows({{1.0}});
    Optimizer opt(OptConfig{});
    opt.add_group("w", {&w}, true);
    TrainConfig cfg;
    CHECK_THROWS_AS(run_epochs(opt, {}, cfg,
                               [&w](Graph& g, const SampleInput&) {
                                 return g.squared_error(&w, 0.0);
                               }),
                    TrainError);
  }

  SUBCASE("quadratic objective converges under sgd") {
    Tensor w = Tensor::from_rows({{10.0}});
    OptConfig oc;
    oc.kind = OptimizerKind::sgd;
    oc.lr = 0.05;
    Optimizer opt(oc);
    opt.add_group("w", {&w}, true);
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.batch_size = 4;
    TrainReport r = run_epochs(opt, toy_samples(8, 2), cfg,
                               [&w](Graph& g, const SampleInput&) {
                                 return g.squared_error(&w, 3.0);
                               });
    REQUIRE(r.epoch_loss.size() == 60);
    CHECK(w.at(0, 0) == doctest::Approx(3.0).epsilon(1e-3));
    for (std::size_t e = 1; e < r.epoch_loss.size(); ++e)
      CHECK(r.epoch_loss[e] <= r.epoch_loss[e - 1] + 1e-12);
    CHECK(r.samples == 8);
    CHECK(r.wall_seconds >= 0.0);
  }
}

TEST_CASE("full-model training") {
  const std::vector<SampleInput> samples = toy_samples(60, 11);

  SUBCASE("loss drops and the run is reproducible") {
    TrainConfig cfg;
    cfg.epochs = 6;
    cfg.batch_size = 8;
    cfg.opt.lr = 0.01;
    cfg.seed = 5;

    Model a = small_model();
    TrainReport ra = train_model(a, samples, cfg);
    REQUIRE(ra.epoch_loss.size() == 6);
    CHECK(ra.epoch_loss.back() < ra.epoch_loss.front());

    Model b = small_model();
    TrainReport rb = train_model(b, samples, cfg);
    CHECK(ra.epoch_loss == rb.epoch_loss);
    auto ga = a.groups();
    auto gb = b.groups();
    for (std::size_t i = 0; i < ga.size(); ++i)
      for (std::size_t j = 0; j < ga[i].tensors.size(); ++j)
        CHECK(same_bits(*ga[i].tensors[j], *gb[i].tensors[j]));
  }

  SUBCASE("rating task trains on squared error") {
    Model m = small_model(OutputMode::rating);
    std::vector<SampleInput> rs = samples;
    for (SampleInput& s : rs) s.label = 1.0 + 4.0 * s.label;  // ratings 1 or 5
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 8;
    cfg.opt.lr = 0.02;
    TrainReport r = train_model(m, rs, cfg);
    CHECK(r.epoch_loss.back() < r.epoch_loss.front());
  }

  SUBCASE("gradient diagnostics fill per-epoch tables") {
    Model m = small_model();
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    cfg.grad_diag = true;
    TrainReport r = train_model(m, samples, cfg);
    REQUIRE(r.grad_norms.size() == 2);
    CHECK(r.grad_norms[0].count("attention") == 1);
    CHECK(r.grad_norms[0].count("head_mlp") == 1);
    bool any_positive = false;
    for (const auto& kv : r.grad_norms[0]) any_positive = any_positive || kv.second > 0.0;
    CHECK(any_positive);
  }
}

TEST_CASE("finetuning freezes everything but the adaptation groups") {
  Model m = small_model();
  // snapshot all parameters before adaptation
  Model before = small_model();

  Rng rng(33);
  m.register_new_domain(4, rng);
  Model zero_shot = small_model();
  {
    Rng rng2(33);
    zero_shot.register_new_domain(4, rng2);
  }

  std::vector<SampleInput> samples = toy_samples(40, 17);
  for (SampleInput& s : samples) {
    s.domain = 1;                 // the appended domain row
    s.item = s.item % 4;          // fresh item table has 4 rows
  }

  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.opt.lr = 0.02;
  TrainReport r = finetune_model(m, samples, cfg);
  REQUIRE(r.epoch_loss.size() == 3);

  // frozen groups keep their exact bytes
  CHECK(same_bits(m.user_table_src, before.user_table_src));
  CHECK(same_bits(m.item_table_src, before.item_table_src));
  CHECK(same_bits(m.side_table, before.side_table));
  for (std::size_t i = 0; i < m.encoder.weights.size(); ++i)
    CHECK(same_bits(m.encoder.weights[i], before.encoder.weights[i]));
  for (std::size_t i = 0; i < m.head.weights.size(); ++i)
    CHECK(same_bits(m.head.weights[i], before.head.weights[i]));
  CHECK(same_bits(m.bridge_gen, zero_shot.bridge_gen));

  // adapted groups moved away from their freshly registered state
  CHECK_FALSE(same_bits(m.domain_table, zero_shot.domain_table));
  CHECK_FALSE(same_bits(m.item_table_tgt, zero_shot.item_table_tgt));
  CHECK_FALSE(same_bits(m.attn1[0].wv, zero_shot.attn1[0].wv));

  SUBCASE("unknown adaptation group is rejected") {
    CHECK_THROWS_AS(finetune_model(m, samples, cfg, {"not_a_group"}), ConfigError);
  }
}
