#include "dacdr/tensor.hpp"

#include <cmath>

namespace dacdr {

Tensor::Tensor(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0)
    throw ArgumentError("tensor dimensions must be non-negative");
  data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Tensor Tensor::full(int rows, int cols, double v) {
  Tensor t(rows, cols);
  for (auto& x : t.data_) x = v;
  return t;
}

Tensor Tensor::identity(int n) {
  Tensor t(n, n);
  for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  Tensor t(r, c);
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c)
      throw ShapeError("from_rows: ragged initializer");
    int j = 0;
    for (double v : row) t.at(i, j++) = v;
    ++i;
  }
  return t;
}

Tensor Tensor::uniform(int rows, int cols, double lo, double hi, Rng& rng) {
  Tensor t(rows, cols);
  for (auto& x : t.data_) x = rng.uniform(lo, hi);
  return t;
}

Tensor Tensor::xavier(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  return uniform(rows, cols, -limit, limit, rng);
}

std::string Tensor::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Tensor::enable_grad() {
  if (grad_.empty()) grad_.assign(data_.size(), 0.0);
}

void Tensor::zero_grad() {
  for (auto& g : grad_) g = 0.0;
}

double Tensor::grad_l2_norm() const {
  double s = 0.0;
  for (double g : grad_) s += g * g;
  return std::sqrt(s);
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace dacdr
