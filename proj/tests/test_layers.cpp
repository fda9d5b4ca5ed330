#include <doctest.h>

#include <cmath>
#include <random>

#include "support/gradcheck.hpp"
#include "vosda/error.hpp"
#include "vosda/layers.hpp"

using namespace vosda;
using vosda::testing::random_tensor;

namespace {

// Direct convolution, one output at a time.
Tensor conv_oracle(const Conv2d& conv, const Tensor& x, int k, int stride, int pad) {
  const int ho = (x.h() + 2 * pad - k) / stride + 1;
  const int wo = (x.w() + 2 * pad - k) / stride + 1;
  const int co = conv.out_channels();
  Tensor y(x.n(), co, ho, wo);
  for (int n = 0; n < x.n(); ++n)
    for (int o = 0; o < co; ++o)
      for (int i = 0; i < ho; ++i)
        for (int j = 0; j < wo; ++j) {
          double s = conv.bias.value[o];
          for (int c = 0; c < x.c(); ++c)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int yy = i * stride - pad + ky, xx = j * stride - pad + kx;
                if (yy < 0 || xx < 0 || yy >= x.h() || xx >= x.w()) continue;
                s += conv.weight.value[((o * x.c() + c) * k + ky) * k + kx] * x.at(n, c, yy, xx);
              }
          y.at(n, o, i, j) = s;
        }
  return y;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

}  // namespace

TEST_CASE("conv forward matches the direct loop") {
  std::mt19937_64 rng(3);
  for (auto [k, stride, pad] : {std::tuple{3, 1, 1}, {3, 2, 1}, {1, 1, 0}, {3, 2, 0}}) {
    Conv2d conv("c", 3, 4, k, stride, pad);
    conv.initialize(rng);
    for (double& b : conv.bias.value) b = std::uniform_real_distribution<double>(-1, 1)(rng);
    const Tensor x = random_tensor(2, 3, 7, 9, rng, -1, 1);
    const Tensor y = conv.forward(x, nullptr);
    const Tensor ref = conv_oracle(conv, x, k, stride, pad);
    REQUIRE(y.same_shape(ref));
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y.data()[i] == doctest::Approx(ref.data()[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv backward matches central differences") {
  std::mt19937_64 rng(5);
  Conv2d conv("c", 2, 3, 3, 2, 1);
  conv.initialize(rng);
  const Tensor x = random_tensor(2, 2, 6, 5, rng, -1, 1);
  Conv2d::Cache cache;
  const Tensor y = conv.forward(x, &cache);
  const Tensor g = random_tensor(y.n(), y.c(), y.h(), y.w(), rng, -1, 1);
  conv.weight.zero_grad();
  conv.bias.zero_grad();
  const Tensor dx = conv.backward(g, cache, true);
  const double h = 1e-5;
  auto readout = [&](const Tensor& in) { return dot(conv.forward(in, nullptr), g); };
  for (std::size_t i = 0; i < x.size(); i += 7) {
    Tensor up = x, down = x;
    up.data()[i] += h;
    down.data()[i] -= h;
    CHECK(dx.data()[i] == doctest::Approx((readout(up) - readout(down)) / (2 * h)).epsilon(1e-6));
  }
  for (std::size_t i = 0; i < conv.weight.size(); i += 5) {
    const double orig = conv.weight.value[i];
    conv.weight.value[i] = orig + h;
    const double a = readout(x);
    conv.weight.value[i] = orig - h;
    const double b = readout(x);
    conv.weight.value[i] = orig;
    CHECK(conv.weight.grad[i] == doctest::Approx((a - b) / (2 * h)).epsilon(1e-6));
  }
  double gsum = 0.0;
  for (int n = 0; n < g.n(); ++n)
    for (double v : g.plane(n, 1)) gsum += v;
  CHECK(conv.bias.grad[1] == doctest::Approx(gsum).epsilon(1e-12));
  CHECK(conv.backward(g, cache, false).empty());
}

TEST_CASE("conv rejects the wrong channel count") {
  Conv2d conv("c", 3, 4, 3, 1, 1);
  CHECK_THROWS_AS(conv.forward(Tensor(1, 2, 4, 4), nullptr), Error);
}

TEST_CASE("bilinear 2x upsampling with half-pixel centres") {
  Tensor x(1, 1, 1, 2);
  x.at(0, 0, 0, 0) = 0.0;
  x.at(0, 0, 0, 1) = 1.0;
  const Tensor y = upsample2x(x);
  REQUIRE(y.h() == 2);
  REQUIRE(y.w() == 4);
  const double expect[4] = {0.0, 0.25, 0.75, 1.0};
  for (int j = 0; j < 4; ++j) {
    CHECK(y.at(0, 0, 0, j) == doctest::Approx(expect[j]));
    CHECK(y.at(0, 0, 1, j) == doctest::Approx(expect[j]));
  }
}

TEST_CASE("upsample backward is the adjoint of upsample") {
  std::mt19937_64 rng(9);
  const Tensor x = random_tensor(2, 3, 5, 4, rng, -1, 1);
  const Tensor g = random_tensor(2, 3, 10, 8, rng, -1, 1);
  CHECK(dot(upsample2x(x), g) == doctest::Approx(dot(x, upsample2x_backward(g))).epsilon(1e-12));
}

TEST_CASE("global average pooling and its adjoint") {
  std::mt19937_64 rng(4);
  const Tensor x = random_tensor(2, 3, 4, 5, rng, -1, 1);
  const Tensor p = global_average_pool(x);
  REQUIRE(p.h() == 1);
  double s = 0.0;
  for (double v : x.plane(1, 2)) s += v;
  CHECK(p.at(1, 2, 0, 0) == doctest::Approx(s / 20.0));
  const Tensor g = random_tensor(2, 3, 1, 1, rng, -1, 1);
  CHECK(dot(p, g) == doctest::Approx(dot(x, global_average_pool_backward(g, 4, 5))).epsilon(1e-12));
}

TEST_CASE("relu and sigmoid with their backward passes") {
  Tensor x(1, 1, 1, 3);
  x.at(0, 0, 0, 0) = -2.0;
  x.at(0, 0, 0, 1) = 0.0;
  x.at(0, 0, 0, 2) = 3.0;
  const Tensor r = relu(x);
  CHECK(r.at(0, 0, 0, 0) == 0.0);
  CHECK(r.at(0, 0, 0, 2) == 3.0);
  const Tensor ones(1, 1, 1, 3, 1.0);
  const Tensor gr = relu_backward(ones, r);
  CHECK(gr.at(0, 0, 0, 0) == 0.0);
  CHECK(gr.at(0, 0, 0, 2) == 1.0);

  const Tensor s = sigmoid(x);
  CHECK(s.at(0, 0, 0, 1) == 0.5);
  const Tensor gs = sigmoid_backward(ones, s);
  CHECK(gs.at(0, 0, 0, 1) == doctest::Approx(0.25));
  CHECK(gs.at(0, 0, 0, 2) == doctest::Approx(s.at(0, 0, 0, 2) * (1 - s.at(0, 0, 0, 2))));
  const Tensor tiny = sigmoid(Tensor(1, 1, 1, 2, -50.0));
  for (double v : tiny.values()) CHECK(v > 0.0);
}

TEST_CASE("reflect padding to a multiple") {
  Tensor x(1, 1, 1, 5);
  for (int j = 0; j < 5; ++j) x.at(0, 0, 0, j) = j;
  const Tensor y = reflect_pad_to_multiple(x, 4);
  REQUIRE(y.h() == 4);
  REQUIRE(y.w() == 8);
  const double row[8] = {0, 1, 2, 3, 4, 3, 2, 1};
  for (int j = 0; j < 8; ++j) CHECK(y.at(0, 0, 0, j) == row[j]);
  // Height 1 cannot reflect three rows; edge replication takes over.
  for (int i = 1; i < 4; ++i) CHECK(y.at(0, 0, i, 6) == 2.0);
  CHECK(reflect_pad_to_multiple(Tensor(1, 1, 8, 8, 1.0), 4) == Tensor(1, 1, 8, 8, 1.0));
}

TEST_CASE("elementwise multiply and add") {
  const Tensor a(1, 2, 2, 2, 3.0), b(1, 2, 2, 2, 0.5);
  CHECK(multiply(a, b) == Tensor(1, 2, 2, 2, 1.5));
  CHECK(add(a, b) == Tensor(1, 2, 2, 2, 3.5));
  CHECK_THROWS_AS(add(a, Tensor(1, 1, 2, 2)), Error);
}
