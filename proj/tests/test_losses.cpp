#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "vosda/error.hpp"
#include "vosda/losses.hpp"

using namespace vosda;

namespace {

Tensor from(std::initializer_list<double> v, int h, int w) {
  Tensor t(1, 1, h, w);
  std::copy(v.begin(), v.end(), t.data());
  return t;
}

std::vector<double> vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

constexpr double kEps = 1e-6;

}  // namespace

TEST_CASE("mask loss examples") {
  const Tensor y = from({1, 0, 0, 1}, 2, 2);
  const Tensor p = from({0.9, 0.2, 0.4, 0.6}, 2, 2);
  const double expect = -(std::log(0.9) + std::log(0.8) + std::log(0.6) + std::log(0.6)) / 4.0;
  CHECK(mask_loss(y, p, kEps) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::abs(mask_loss(y, p, kEps) - 0.3375) < 1e-4);

  CHECK(mask_loss(y, Tensor(1, 1, 2, 2, 0.5), kEps) == doctest::Approx(std::log(2.0)));
  CHECK(mask_loss(y, y, kEps) == doctest::Approx(-std::log(1.0 - kEps)).epsilon(1e-9));
  CHECK(mask_loss(y, y, kEps) < 1e-5);
  CHECK_THROWS_AS(mask_loss(y, Tensor(1, 1, 2, 3), kEps), Error);
}

TEST_CASE("supervised loss examples") {
  LossWeights w;
  const Tensor y = from({1, 0, 0, 1}, 2, 2);
  const Tensor pm = from({0.9, 0.2, 0.4, 0.6}, 2, 2);
  const Tensor pf = from({0.7, 0.1, 0.3, 0.8}, 2, 2);
  const double lm = mask_loss(y, pm, kEps), lf = mask_loss(y, pf, kEps);
  CHECK(supervised_loss(y, pm, pf, w) == doctest::Approx(0.5 * lm + 0.5 * lf).epsilon(1e-14));
  CHECK(0.5 * 0.4 + 0.5 * 0.6 == doctest::Approx(0.5));
  w.alpha2 = 0.0;
  CHECK(supervised_loss(y, pm, pf, w) == 0.5 * lm);
}

TEST_CASE("confusion and discriminator loss examples") {
  const Tensor half(4, 1, 1, 1, 0.5);
  CHECK(confusion_loss(half, kEps) == doctest::Approx(std::log(2.0)));
  CHECK(confusion_loss(Tensor(2, 1, 1, 1, 0.1), kEps) == doctest::Approx(2.302585093).epsilon(1e-9));
  CHECK(confusion_loss(Tensor(2, 1, 1, 1, 1.0 - kEps), kEps) < 1e-5);

  CHECK(std::abs(discriminator_loss(half, half, kEps) - 2.0 * std::log(2.0)) < 1e-6);
  CHECK(std::abs(discriminator_loss(Tensor(1, 1, 1, 1, 0.8), Tensor(1, 1, 1, 1, 0.3), kEps) -
                 (-std::log(0.8) - std::log(0.7))) < 1e-6);
  CHECK(discriminator_loss(Tensor(3, 1, 1, 1, 1 - kEps), Tensor(3, 1, 1, 1, kEps), kEps) < 1e-5);
}

TEST_CASE("weighted totals") {
  LossWeights w;
  CHECK(uda_loss(0.6931, 1.3863, w) == doctest::Approx(0.6931 + 0.5 * 1.3863));
  CHECK(std::abs(uda_loss(std::log(2.0), 2 * std::log(2.0), w) - 2 * std::log(2.0)) < 1e-12);
  w.beta2 = 0.0;
  CHECK(uda_loss(0.7, 1.3, w) == 0.7);
  CHECK(uda_loss(0.0, 0.0, w) == 0.0);

  LossWeights s;
  s.lambda1 = 1.0;
  CHECK(shared_loss(1.0, 2.0, 2.0, s) == doctest::Approx(4.0));
  s.lambda1 = 0.0;
  CHECK(shared_loss(1.0, 2.0, 2.0, s) == doctest::Approx(2.0));
}

TEST_CASE("straight-loop oracles on seeded random 4x4 instances") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  std::bernoulli_distribution bit(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor y(1, 1, 4, 4), pm(1, 1, 4, 4), pf(1, 1, 4, 4);
    for (double& v : y.values()) v = bit(rng);
    for (double& v : pm.values()) v = prob(rng);
    for (double& v : pf.values()) v = prob(rng);
    // Include the clamp region on some pixels.
    if (trial % 5 == 0) pm.data()[trial % 16] = trial % 2 ? 0.0 : 1.0;
    Tensor ds(4, 1, 1, 1), dt(4, 1, 1, 1);
    for (double& v : ds.values()) v = prob(rng);
    for (double& v : dt.values()) v = prob(rng);
    LossWeights w;
    w.alpha1 = prob(rng);
    w.alpha2 = prob(rng);
    w.beta1 = prob(rng);
    w.beta2 = prob(rng);
    w.lambda1 = prob(rng);
    w.lambda2 = prob(rng);

    CHECK(std::abs(mask_loss(y, pm, kEps) - oracle::bce(vec(y), vec(pm), kEps)) < 1e-6);
    CHECK(std::abs(supervised_loss(y, pm, pf, w) -
                   oracle::supervised(vec(y), vec(pm), vec(pf), w.alpha1, w.alpha2, kEps)) < 1e-6);
    CHECK(std::abs(confusion_loss(dt, kEps) - oracle::confusion(vec(dt), kEps)) < 1e-6);
    CHECK(std::abs(discriminator_loss(ds, dt, kEps) - oracle::discriminator(vec(ds), vec(dt), kEps)) < 1e-6);
    const double a = prob(rng) * 3, b = prob(rng) * 3, c = prob(rng) * 3;
    CHECK(std::abs(uda_loss(a, b, w) - oracle::uda(a, b, w.beta1, w.beta2)) < 1e-6);
    CHECK(std::abs(shared_loss(a, b, c, w) - oracle::shared(a, b, c, w.lambda1, w.lambda2)) < 1e-6);
  }
}

TEST_CASE("loss gradients against central differences") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> prob(0.05, 0.95);
  Tensor y(2, 1, 3, 3), p(2, 1, 3, 3);
  for (double& v : y.values()) v = rng() % 2;
  for (double& v : p.values()) v = prob(rng);
  const double h = 1e-6;
  const Tensor g = mask_loss_grad(y, p, kEps);
  for (std::size_t i = 0; i < p.size(); ++i) {
    Tensor u = p, d = p;
    u.data()[i] += h;
    d.data()[i] -= h;
    CHECK(g.data()[i] == doctest::Approx((mask_loss(y, u, kEps) - mask_loss(y, d, kEps)) / (2 * h)).epsilon(1e-6));
  }
  Tensor ds(3, 1, 1, 1), dt(3, 1, 1, 1);
  for (double& v : ds.values()) v = prob(rng);
  for (double& v : dt.values()) v = prob(rng);
  const Tensor gc = confusion_loss_grad(dt, kEps);
  const Tensor gs = discriminator_loss_grad_source(ds, kEps);
  const Tensor gt = discriminator_loss_grad_target(dt, kEps);
  for (std::size_t i = 0; i < 3; ++i) {
    Tensor u = dt, d = dt;
    u.data()[i] += h;
    d.data()[i] -= h;
    CHECK(gc.data()[i] == doctest::Approx((confusion_loss(u, kEps) - confusion_loss(d, kEps)) / (2 * h)).epsilon(1e-6));
    CHECK(gt.data()[i] == doctest::Approx((discriminator_loss(ds, u, kEps) - discriminator_loss(ds, d, kEps)) / (2 * h)).epsilon(1e-6));
    Tensor su = ds, sd = ds;
    su.data()[i] += h;
    sd.data()[i] -= h;
    CHECK(gs.data()[i] == doctest::Approx((discriminator_loss(su, dt, kEps) - discriminator_loss(sd, dt, kEps)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("gradients vanish where the clamp is active") {
  const Tensor y = from({1, 0}, 1, 2);
  const Tensor p = from({0.0, 1.0}, 1, 2);
  for (double v : vec(mask_loss_grad(y, p, kEps))) CHECK(v == 0.0);
  CHECK(std::isfinite(mask_loss(y, p, kEps)));
  CHECK(mask_loss(y, p, kEps) == doctest::Approx(-std::log(kEps)));
}

TEST_CASE("adversarial sign structure") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> prob(0.01, 0.99);
  for (int t = 0; t < 50; ++t) {
    Tensor dt(4, 1, 1, 1);
    for (double& v : dt.values()) v = prob(rng);
    for (double v : vec(confusion_loss_grad(dt, kEps))) CHECK(v < 0.0);
    for (double v : vec(discriminator_loss_grad_target(dt, kEps))) CHECK(v > 0.0);
    for (double v : vec(discriminator_loss_grad_source(dt, kEps))) CHECK(v < 0.0);
    // Label flip: the confusion loss is the source term of L_D applied to target outputs.
    CHECK(confusion_loss(dt, kEps) == doctest::Approx(discriminator_loss(dt, Tensor(4, 1, 1, 1, kEps), kEps) +
                                                      std::log(1.0 - kEps)));
  }
}

TEST_CASE("mask loss strictly increases when one pixel moves away from the label") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    Tensor y(1, 1, 4, 4);
    for (double& v : y.values()) v = rng() % 2;
    const double floor = mask_loss(y, y, kEps);
    Tensor p = y;
    const std::size_t i = rng() % 16;
    p.data()[i] = y.data()[i] == 1.0 ? 0.7 : 0.3;
    CHECK(mask_loss(y, p, kEps) > floor);
    for (const Tensor* x : {&p, &y}) CHECK(mask_loss(y, *x, kEps) >= 0.0);
  }
}

TEST_CASE("discriminator accuracy") {
  Tensor ds(2, 1, 1, 1), dt(2, 1, 1, 1);
  ds.data()[0] = 0.9;
  ds.data()[1] = 0.4;
  dt.data()[0] = 0.2;
  dt.data()[1] = 0.6;
  CHECK(discriminator_accuracy(ds, dt) == 0.5);
}
