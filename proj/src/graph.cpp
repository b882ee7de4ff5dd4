#include "dacdr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>

#include "dacdr/kernels.hpp"

namespace dacdr {

using kernels::active;

namespace {

void require_same_shape(const Tensor* a, const Tensor* b, const char* op) {
  if (!a->same_shape(*b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a->shape_str() +
                     " vs " + b->shape_str());
}

const double kSigmoidCeil = std::nextafter(1.0, 0.0);
const double kSigmoidFloor = std::numeric_limits<double>::min();

}  // namespace

double stable_sigmoid(double z) {
  double y;
  if (z >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    y = e / (1.0 + e);
  }
  return std::clamp(y, kSigmoidFloor, kSigmoidCeil);
}

Tensor* Graph::make(int rows, int cols) {
  owned_.emplace_back(rows, cols);
  Tensor* t = &owned_.back();
  t->enable_grad();
  return t;
}

Tensor* Graph::record(Tensor* out, std::function<void()> back, const char* op) {
  if (check_finite_ && !out->all_finite())
    throw Error(std::string(op) + ": produced non-finite values");
  nodes_.push_back(Node{out, std::move(back)});
  return out;
}

Tensor* Graph::matmul(Tensor* a, Tensor* b) {
  if (a->cols() != b->rows())
    throw ShapeError("matmul: inner dimensions disagree, " + a->shape_str() +
                     " vs " + b->shape_str());
  const int m = a->rows(), k = a->cols(), n = b->cols();
  Tensor* out = make(m, n);
  active().matmul_acc(a->data(), b->data(), out->data(), m, k, n);
  return record(out, [a, b, out, m, k, n] {
    if (a->tracks_grad()) {
      // dL/da = g * b^T; materialize b^T so the product keeps the fixed
      // accumulation order.
      std::vector<double> bt(static_cast<std::size_t>(n) * k);
      for (int p = 0; p < k; ++p)
        for (int j = 0; j < n; ++j) bt[static_cast<std::size_t>(j) * k + p] = b->at(p, j);
      active().matmul_acc(out->grad(), bt.data(), a->grad(), m, n, k);
    }
    if (b->tracks_grad())
      active().matmul_tn_acc(a->data(), out->grad(), b->grad(), m, k, n);
  }, "matmul");
}

Tensor* Graph::transpose(Tensor* a) {
  const int r = a->rows(), c = a->cols();
  Tensor* out = make(c, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out->at(j, i) = a->at(i, j);
  return record(out, [a, out, r, c] {
    if (!a->tracks_grad()) return;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        a->grad()[static_cast<std::size_t>(i) * c + j] += out->grad()[static_cast<std::size_t>(j) * r + i];
  }, "transpose");
}

Tensor* Graph::softmax_rows(Tensor* a) {
  const int r = a->rows(), c = a->cols();
  if (c == 0) throw ArgumentError("softmax_rows: empty rows");
  Tensor* out = make(r, c);
  for (int i = 0; i < r; ++i) {
    const double* in = a->row(i);
    double* y = out->row(i);
    double mx = in[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, in[j]);
    double sum = 0.0;
    for (int j = 0; j < c; ++j) {
      y[j] = std::exp(in[j] - mx);
      sum += y[j];
    }
    const double inv = 1.0 / sum;
    for (int j = 0; j < c; ++j) y[j] *= inv;
  }
  return record(out, [a, out, r, c] {
    if (!a->tracks_grad()) return;
    for (int i = 0; i < r; ++i) {
      const double* y = out->row(i);
      const double* g = out->grad() + static_cast<std::size_t>(i) * c;
      double* ga = a->grad() + static_cast<std::size_t>(i) * c;
      double dot = 0.0;
      for (int j = 0; j < c; ++j) dot += g[j] * y[j];
      for (int j = 0; j < c; ++j) ga[j] += y[j] * (g[j] - dot);
    }
  }, "softmax_rows");
}

Tensor* Graph::add(Tensor* a, Tensor* b) {
  require_same_shape(a, b, "add");
  Tensor* out = make(a->rows(), a->cols());
  active().add(a->data(), b->data(), out->data(), out->size());
  return record(out, [a, b, out] {
    if (a->tracks_grad()) active().axpy(1.0, out->grad(), a->grad(), out->size());
    if (b->tracks_grad()) active().axpy(1.0, out->grad(), b->grad(), out->size());
  }, "add");
}

Tensor* Graph::sub(Tensor* a, Tensor* b) {
  require_same_shape(a, b, "sub");
  Tensor* out = make(a->rows(), a->cols());
  active().sub(a->data(), b->data(), out->data(), out->size());
  return record(out, [a, b, out] {
    if (a->tracks_grad()) active().axpy(1.0, out->grad(), a->grad(), out->size());
    if (b->tracks_grad()) active().axpy(-1.0, out->grad(), b->grad(), out->size());
  }, "sub");
}

Tensor* Graph::hadamard(Tensor* a, Tensor* b) {
  require_same_shape(a, b, "hadamard");
  Tensor* out = make(a->rows(), a->cols());
  active().mul(a->data(), b->data(), out->data(), out->size());
  return record(out, [a, b, out] {
    const std::size_t n = out->size();
    if (a->tracks_grad()) {
      for (std::size_t i = 0; i < n; ++i) a->grad()[i] += out->grad()[i] * b->data()[i];
    }
    if (b->tracks_grad()) {
      for (std::size_t i = 0; i < n; ++i) b->grad()[i] += out->grad()[i] * a->data()[i];
    }
  }, "hadamard");
}

Tensor* Graph::scale(Tensor* a, double c) {
  Tensor* out = make(a->rows(), a->cols());
  active().scale(a->data(), c, out->data(), out->size());
  return record(out, [a, out, c] {
    if (a->tracks_grad()) active().axpy(c, out->grad(), a->grad(), out->size());
  }, "scale");
}

Tensor* Graph::relu(Tensor* a) {
  Tensor* out = make(a->rows(), a->cols());
  active().relu(a->data(), out->data(), out->size());
  return record(out, [a, out] {
    if (a->tracks_grad())
      active().relu_backward(a->data(), out->grad(), a->grad(), out->size());
  }, "relu");
}

Tensor* Graph::sigmoid(Tensor* a) {
  Tensor* out = make(a->rows(), a->cols());
  for (std::size_t i = 0; i < out->size(); ++i)
    out->data()[i] = stable_sigmoid(a->data()[i]);
  return record(out, [a, out] {
    if (!a->tracks_grad()) return;
    for (std::size_t i = 0; i < out->size(); ++i) {
      const double y = out->data()[i];
      a->grad()[i] += out->grad()[i] * y * (1.0 - y);
    }
  }, "sigmoid");
}

Tensor* Graph::concat_cols(const std::vector<Tensor*>& parts) {
  if (parts.empty()) throw ArgumentError("concat_cols: empty part list");
  int total = 0;
  for (const Tensor* p : parts) {
    if (p->rows() != 1)
      throw ShapeError("concat_cols: parts must be single-row, got " + p->shape_str());
    total += p->cols();
  }
  Tensor* out = make(1, total);
  int off = 0;
  for (const Tensor* p : parts) {
    std::memcpy(out->data() + off, p->data(), p->size() * sizeof(double));
    off += p->cols();
  }
  return record(out, [parts, out] {
    int o = 0;
    for (Tensor* p : parts) {
      if (p->tracks_grad())
        active().axpy(1.0, out->grad() + o, p->grad(), p->size());
      o += p->cols();
    }
  }, "concat_cols");
}

Tensor* Graph::lookup(Tensor* table, std::vector<int> ids) {
  if (ids.empty()) throw ArgumentError("lookup: empty id list");
  const int v = table->rows(), k = table->cols();
  for (int id : ids) {
    if (id < 0 || id >= v)
      throw IndexError("lookup: id " + std::to_string(id) + " outside table of " +
                       std::to_string(v) + " rows");
  }
  Tensor* out = make(static_cast<int>(ids.size()), k);
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::memcpy(out->row(static_cast<int>(i)), table->row(ids[i]),
                static_cast<std::size_t>(k) * sizeof(double));
  auto idv = std::make_shared<std::vector<int>>(std::move(ids));
  return record(out, [table, out, idv, k] {
    if (!table->tracks_grad()) return;
    for (std::size_t i = 0; i < idv->size(); ++i)
      active().axpy(1.0, out->grad() + i * static_cast<std::size_t>(k),
                    table->grad() + static_cast<std::size_t>((*idv)[i]) * k,
                    static_cast<std::size_t>(k));
  }, "lookup");
}

Tensor* Graph::reshape(Tensor* a, int rows, int cols) {
  if (rows < 0 || cols < 0 ||
      static_cast<std::size_t>(rows) * cols != a->size())
    throw ShapeError("reshape: cannot view " + a->shape_str() + " as " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  Tensor* out = make(rows, cols);
  std::memcpy(out->data(), a->data(), a->size() * sizeof(double));
  return record(out, [a, out] {
    if (a->tracks_grad()) active().axpy(1.0, out->grad(), a->grad(), out->size());
  }, "reshape");
}

Tensor* Graph::repeat_row(Tensor* a, int n) {
  if (a->rows() != 1)
    throw ShapeError("repeat_row: expected a single row, got " + a->shape_str());
  if (n <= 0) throw ArgumentError("repeat_row: count must be positive");
  const int c = a->cols();
  Tensor* out = make(n, c);
  for (int i = 0; i < n; ++i)
    std::memcpy(out->row(i), a->data(), static_cast<std::size_t>(c) * sizeof(double));
  return record(out, [a, out, n, c] {
    if (!a->tracks_grad()) return;
    for (int i = 0; i < n; ++i)
      active().axpy(1.0, out->grad() + static_cast<std::size_t>(i) * c, a->grad(),
                    static_cast<std::size_t>(c));
  }, "repeat_row");
}

Tensor* Graph::scale_rows(Tensor* a, Tensor* w) {
  if (w->rows() != 1 || w->cols() != a->rows())
    throw ShapeError("scale_rows: weights " + w->shape_str() + " do not match " +
                     a->shape_str());
  const int r = a->rows(), c = a->cols();
  Tensor* out = make(r, c);
  for (int i = 0; i < r; ++i)
    active().scale(a->row(i), w->data()[i], out->row(i), static_cast<std::size_t>(c));
  return record(out, [a, w, out, r, c] {
    for (int i = 0; i < r; ++i) {
      const double* g = out->grad() + static_cast<std::size_t>(i) * c;
      if (a->tracks_grad())
        active().axpy(w->data()[i], g, a->grad() + static_cast<std::size_t>(i) * c,
                      static_cast<std::size_t>(c));
      if (w->tracks_grad()) {
        double dot = 0.0;
        for (int j = 0; j < c; ++j) dot += g[j] * a->at(i, j);
        w->grad()[i] += dot;
      }
    }
  }, "scale_rows");
}

Tensor* Graph::sum(Tensor* a) {
  Tensor* out = make(1, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < a->size(); ++i) s += a->data()[i];
  out->data()[0] = s;
  return record(out, [a, out] {
    if (!a->tracks_grad()) return;
    const double g = out->grad()[0];
    for (std::size_t i = 0; i < a->size(); ++i) a->grad()[i] += g;
  }, "sum");
}

Tensor* Graph::mean_rows(Tensor* a) {
  const int r = a->rows(), c = a->cols();
  if (r == 0) throw ArgumentError("mean_rows: no rows");
  Tensor* out = make(1, c);
  for (int i = 0; i < r; ++i)
    active().axpy(1.0, a->row(i), out->data(), static_cast<std::size_t>(c));
  active().scale(out->data(), 1.0 / r, out->data(), static_cast<std::size_t>(c));
  return record(out, [a, out, r, c] {
    if (!a->tracks_grad()) return;
    const double inv = 1.0 / r;
    for (int i = 0; i < r; ++i)
      active().axpy(inv, out->grad(), a->grad() + static_cast<std::size_t>(i) * c,
                    static_cast<std::size_t>(c));
  }, "mean_rows");
}

Tensor* Graph::weighted_rowsum(Tensor* a, std::vector<double> w) {
  const int r = a->rows(), c = a->cols();
  if (static_cast<int>(w.size()) != r)
    throw ShapeError("weighted_rowsum: " + std::to_string(w.size()) +
                     " weights for " + std::to_string(r) + " rows");
  double s = 0.0;
  for (double x : w) s += x;
  if (std::fabs(s - 1.0) > 1e-9)
    throw ArgumentError("weighted_rowsum: weights sum to " + std::to_string(s));
  Tensor* out = make(1, c);
  for (int i = 0; i < r; ++i)
    active().axpy(w[i], a->row(i), out->data(), static_cast<std::size_t>(c));
  auto wv = std::make_shared<std::vector<double>>(std::move(w));
  return record(out, [a, out, wv, r, c] {
    if (!a->tracks_grad()) return;
    for (int i = 0; i < r; ++i)
      active().axpy((*wv)[i], out->grad(), a->grad() + static_cast<std::size_t>(i) * c,
                    static_cast<std::size_t>(c));
  }, "weighted_rowsum");
}

Tensor* Graph::bce_with_logit(Tensor* z, double label) {
  if (z->rows() != 1 || z->cols() != 1)
    throw ArgumentError("bce_with_logit: logit must be 1x1, got " + z->shape_str());
  if (label != 0.0 && label != 1.0)
    throw ArgumentError("bce_with_logit: label must be 0 or 1, got " +
                        std::to_string(label));
  const double zv = z->data()[0];
  Tensor* out = make(1, 1);
  out->data()[0] = std::max(zv, 0.0) - zv * label + std::log1p(std::exp(-std::fabs(zv)));
  return record(out, [z, out, label] {
    if (z->tracks_grad())
      z->grad()[0] += out->grad()[0] * (stable_sigmoid(z->data()[0]) - label);
  }, "bce_with_logit");
}

Tensor* Graph::squared_error(Tensor* z, double target) {
  if (z->rows() != 1 || z->cols() != 1)
    throw ArgumentError("squared_error: prediction must be 1x1, got " + z->shape_str());
  const double d = z->data()[0] - target;
  Tensor* out = make(1, 1);
  out->data()[0] = d * d;
  return record(out, [z, out, target] {
    if (z->tracks_grad())
      z->grad()[0] += out->grad()[0] * 2.0 * (z->data()[0] - target);
  }, "squared_error");
}

void Graph::backward(Tensor* loss, double seed) {
  if (loss->rows() != 1 || loss->cols() != 1)
    throw ArgumentError("backward: loss must be scalar, got " + loss->shape_str());
  for (Tensor& t : owned_) t.zero_grad();
  loss->grad()[0] = seed;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->back();
}

void Graph::reset() {
  nodes_.clear();
  owned_.clear();
}

}  // namespace dacdr
