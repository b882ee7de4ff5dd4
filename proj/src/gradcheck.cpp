#include "dacdr/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dacdr {

double max_rel_grad_error(const std::function<double()>& value_fn,
                          const std::function<void()>& backward_fn,
                          std::span<Tensor* const> leaves, double eps,
                          double denom_floor) {
  if (eps <= 0.0) throw ArgumentError("max_rel_grad_error: eps must be positive");
  if (denom_floor <= 0.0)
    throw ArgumentError("max_rel_grad_error: denom_floor must be positive");

  backward_fn();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(leaves.size());
  for (Tensor* leaf : leaves) {
    if (!leaf->tracks_grad())
      throw ArgumentError("max_rel_grad_error: leaf has no gradient after backward");
    analytic.push_back(leaf->grad_values());
  }

  double worst = 0.0;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Tensor* leaf = leaves[li];
    for (std::size_t i = 0; i < leaf->size(); ++i) {
      const double saved = leaf->values()[i];
      leaf->values()[i] = saved + eps;
      const double up = value_fn();
      leaf->values()[i] = saved - eps;
      const double down = value_fn();
      leaf->values()[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[li][i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), denom_floor});
      worst = std::max(worst, std::fabs(a - numeric) / denom);
    }
  }
  return worst;
}

double grad_check(const std::function<Tensor*(Graph&, Tensor*)>& f, Tensor& x,
                  double eps) {
  Tensor* leaves[] = {&x};
  return max_rel_grad_error(
      [&] {
        Graph g;
        return f(g, &x)->values()[0];
      },
      [&] {
        x.enable_grad();
        x.zero_grad();
        Graph g;
        Tensor* loss = f(g, &x);
        g.backward(loss);
      },
      leaves, eps);
}

}  // namespace dacdr
