#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "dacdr/errors.hpp"
#include "dacdr/rng.hpp"

namespace dacdr {

// Dense row-major 2-D array of doubles with an optional gradient buffer of
// the same shape. Gradients accumulate; callers zero them between steps.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols);  // zeros

  static Tensor zeros(int rows, int cols) { return Tensor(rows, cols); }
  static Tensor full(int rows, int cols, double v);
  static Tensor identity(int n);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor uniform(int rows, int cols, double lo, double hi, Rng& rng);
  // Uniform with the Xavier/Glorot limit sqrt(6 / (rows + cols)).
  static Tensor xavier(int rows, int cols, Rng& rng);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Tensor& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  std::string shape_str() const;

  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }
  const double* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }

  // Gradient tracking. A tensor with no grad buffer is skipped by backward.
  bool tracks_grad() const { return !grad_.empty(); }
  void enable_grad();
  void disable_grad() { grad_.clear(); grad_.shrink_to_fit(); }
  void zero_grad();
  double* grad() { return grad_.data(); }
  const double* grad() const { return grad_.data(); }
  std::vector<double>& grad_values() { return grad_; }
  const std::vector<double>& grad_values() const { return grad_; }

  double grad_l2_norm() const;
  bool all_finite() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> data_;
  std::vector<double> grad_;
};

}  // namespace dacdr
