#include <cstring>
#include <vector>

#include "dacdr/kernels.hpp"
#include "dacdr/rng.hpp"
#include "doctest.h"

using namespace dacdr;
using kernels::Backend;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -2.0,
                               double hi = 2.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar matmul_acc matches a hand-computed product and accumulates") {
  const Backend& k = kernels::scalar_backend();
  // [[1,2],[3,4]] * [[5,6],[7,8]] = [[19,22],[43,50]]
  double a[] = {1, 2, 3, 4};
  double b[] = {5, 6, 7, 8};
  double c[] = {1, 0, 0, 1};
  k.matmul_acc(a, b, c, 2, 2, 2);
  CHECK(c[0] == 20.0);
  CHECK(c[1] == 22.0);
  CHECK(c[2] == 43.0);
  CHECK(c[3] == 51.0);
}

TEST_CASE("scalar matmul_tn_acc computes a^T * g") {
  const Backend& k = kernels::scalar_backend();
  // a is 3x2, g is 3x1 -> c is 2x1, c = a^T g.
  double a[] = {1, 2, 3, 4, 5, 6};
  double g[] = {1, 1, 1};
  double c[] = {0, 0};
  k.matmul_tn_acc(a, g, c, 3, 2, 1);
  CHECK(c[0] == 9.0);   // 1+3+5
  CHECK(c[1] == 12.0);  // 2+4+6
}

TEST_CASE("relu maps negative zero to positive zero") {
  const Backend& k = kernels::scalar_backend();
  double in[] = {-0.0, 0.0, -1.5, 2.5};
  double out[4];
  k.relu(in, out, 4);
  CHECK(!std::signbit(out[0]));
  CHECK(out[2] == 0.0);
  CHECK(out[3] == 2.5);
}

TEST_CASE("every available backend is bitwise-equal to the scalar reference") {
  const auto& backends = kernels::available_backends();
  REQUIRE(!backends.empty());
  CHECK(std::string(backends.front()->name) == "scalar");
  const Backend& ref = kernels::scalar_backend();

  Rng rng(20240915);
  // Odd sizes on purpose: tails must go through the same scalar path.
  const int shapes[][3] = {{1, 1, 1}, {2, 3, 4}, {5, 7, 3},
                           {4, 4, 4}, {3, 9, 11}, {13, 5, 6}};

  for (const Backend* bk : backends) {
    CAPTURE(bk->name);
    for (const auto& s : shapes) {
      const int m = s[0], kk = s[1], n = s[2];
      auto a = random_vec(static_cast<std::size_t>(m) * kk, rng);
      auto b = random_vec(static_cast<std::size_t>(kk) * n, rng);
      auto c0 = random_vec(static_cast<std::size_t>(m) * n, rng);
      auto c1 = c0;
      ref.matmul_acc(a.data(), b.data(), c0.data(), m, kk, n);
      bk->matmul_acc(a.data(), b.data(), c1.data(), m, kk, n);
      CHECK(bitwise_equal(c0, c1));

      auto g = random_vec(static_cast<std::size_t>(m) * n, rng);
      auto t0 = random_vec(static_cast<std::size_t>(kk) * n, rng);
      auto t1 = t0;
      ref.matmul_tn_acc(a.data(), g.data(), t0.data(), m, kk, n);
      bk->matmul_tn_acc(a.data(), g.data(), t1.data(), m, kk, n);
      CHECK(bitwise_equal(t0, t1));
    }

    for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 17u, 64u, 129u}) {
      auto x = random_vec(n, rng);
      auto y = random_vec(n, rng);
      std::vector<double> o0(n), o1(n);

      ref.add(x.data(), y.data(), o0.data(), n);
      bk->add(x.data(), y.data(), o1.data(), n);
      CHECK(bitwise_equal(o0, o1));

      ref.sub(x.data(), y.data(), o0.data(), n);
      bk->sub(x.data(), y.data(), o1.data(), n);
      CHECK(bitwise_equal(o0, o1));

      ref.mul(x.data(), y.data(), o0.data(), n);
      bk->mul(x.data(), y.data(), o1.data(), n);
      CHECK(bitwise_equal(o0, o1));

      ref.scale(x.data(), 1.37, o0.data(), n);
      bk->scale(x.data(), 1.37, o1.data(), n);
      CHECK(bitwise_equal(o0, o1));

      auto y0 = y, y1 = y;
      ref.axpy(-0.61, x.data(), y0.data(), n);
      bk->axpy(-0.61, x.data(), y1.data(), n);
      CHECK(bitwise_equal(y0, y1));

      // Mix in exact zeros and negative zeros for relu.
      auto rx = x;
      if (n >= 2) {
        rx[0] = -0.0;
        rx[1] = 0.0;
      }
      ref.relu(rx.data(), o0.data(), n);
      bk->relu(rx.data(), o1.data(), n);
      CHECK(bitwise_equal(o0, o1));

      auto gx0 = random_vec(n, rng);
      auto gx1 = gx0;
      ref.relu_backward(rx.data(), y.data(), gx0.data(), n);
      bk->relu_backward(rx.data(), y.data(), gx1.data(), n);
      CHECK(bitwise_equal(gx0, gx1));
    }
  }
}

TEST_CASE("kernel selection by name") {
  CHECK(kernels::select("scalar"));
  CHECK(std::string(kernels::active().name) == "scalar");
  CHECK(!kernels::select("no-such-backend"));
  // Restore the default choice for the rest of the suite.
  for (const auto* bk : kernels::available_backends()) kernels::select(bk->name);
}
