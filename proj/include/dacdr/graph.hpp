#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "dacdr/tensor.hpp"

namespace dacdr {

// Reverse-mode tape over Tensor. Each op appends one node (output tensor +
// backward rule); insertion order is topological order by construction, and
// backward() replays the nodes in exact reverse. The graph owns every
// intermediate tensor; operand tensors passed in from outside are leaves and
// receive gradients only if their grad buffer is enabled.
//
// A graph and its tensors are confined to one thread. Reset (or destroy) the
// graph between training steps; leaf gradients accumulate across backward
// calls until the caller zeroes them.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Tensor* matmul(Tensor* a, Tensor* b);
  Tensor* transpose(Tensor* a);
  Tensor* softmax_rows(Tensor* a);

  Tensor* add(Tensor* a, Tensor* b);
  Tensor* sub(Tensor* a, Tensor* b);
  Tensor* hadamard(Tensor* a, Tensor* b);
  Tensor* scale(Tensor* a, double c);
  Tensor* relu(Tensor* a);
  Tensor* sigmoid(Tensor* a);  // output clamped into the open interval (0,1)

  Tensor* concat_cols(const std::vector<Tensor*>& parts);
  Tensor* lookup(Tensor* table, std::vector<int> ids);

  // Same data, new shape; rows*cols must equal a's element count.
  Tensor* reshape(Tensor* a, int rows, int cols);
  // n copies of a single row; backward sums the row gradients.
  Tensor* repeat_row(Tensor* a, int n);

  // out[i,:] = w[0,i] * a[i,:]; w is 1 x rows(a).
  Tensor* scale_rows(Tensor* a, Tensor* w);

  Tensor* sum(Tensor* a);        // 1x1
  Tensor* mean_rows(Tensor* a);  // 1 x cols
  // Constant (non-differentiated) weights; must have rows(a) entries summing
  // to 1 within 1e-9.
  Tensor* weighted_rowsum(Tensor* a, std::vector<double> w);

  // Numerically stable binary cross-entropy of a logit against a 0/1 label.
  Tensor* bce_with_logit(Tensor* z, double label);
  Tensor* squared_error(Tensor* z, double target);  // (z - target)^2

  // Propagates seed * dL/dL backwards from a scalar loss. Graph-owned grads
  // are cleared first; leaf grads accumulate.
  void backward(Tensor* loss, double seed = 1.0);

  void reset();
  std::size_t node_count() const { return nodes_.size(); }

  // When set, every op validates that its output is finite. Off by default;
  // the training loop checks losses and gradients instead.
  void set_check_finite(bool on) { check_finite_ = on; }

 private:
  struct Node {
    Tensor* out;
    std::function<void()> back;
  };

  Tensor* make(int rows, int cols);
  Tensor* record(Tensor* out, std::function<void()> back, const char* op);

  std::deque<Tensor> owned_;
  std::vector<Node> nodes_;
  bool check_finite_ = false;
};

double stable_sigmoid(double z);

}  // namespace dacdr
