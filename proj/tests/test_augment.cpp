#include <doctest.h>

#include <random>

#include "support/gradcheck.hpp"
#include "support/warp.hpp"
#include "vosda/augment.hpp"
#include "vosda/error.hpp"
#include "vosda/synthetic.hpp"

using namespace vosda;
using vosda::testing::random_tensor;
using vosda::testing::warp_residual;

namespace {

FrameSample random_sample(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FrameSample s;
  s.image = random_tensor(1, 3, h, w, rng, 0, 1);
  s.flow = random_tensor(1, 2, h, w, rng, -5, 5);
  Tensor m(1, 1, h, w);
  for (double& v : m.values()) v = rng() % 2;
  s.set_mask(m);
  return s;
}

}  // namespace

TEST_CASE("crop 384 of a 480x854 sample") {
  const FrameSample s = random_sample(480, 854, 1);
  std::mt19937_64 rng(2);
  const FrameSample a = augment(s, 384, rng);
  CHECK(a.image.h() == 384);
  CHECK(a.image.w() == 384);
  CHECK(a.image.c() == 3);
  CHECK(a.flow.c() == 2);
  CHECK(a.mask().c() == 1);
  CHECK(a.mask().h() == 384);
  a.validate();
}

TEST_CASE("one window and one flip for image, flow and mask") {
  const FrameSample s = random_sample(20, 30, 3);
  std::mt19937_64 rng(4);
  AugmentOptions no_jitter;
  no_jitter.color_jitter = false;
  int flips = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const AugmentParams p = draw_augment_params(20, 30, 12, rng, no_jitter);
    const FrameSample a = apply_augment(s, p);
    flips += p.flip;
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 12; ++x) {
        const int sx = p.x0 + (p.flip ? 11 - x : x);
        const int sy = p.y0 + y;
        for (int c = 0; c < 3; ++c) CHECK(a.image.at(0, c, y, x) == s.image.at(0, c, sy, sx));
        CHECK(a.mask().at(0, 0, y, x) == s.mask().at(0, 0, sy, sx));
        CHECK(a.flow.at(0, 0, y, x) == (p.flip ? -1.0 : 1.0) * s.flow.at(0, 0, sy, sx));
        CHECK(a.flow.at(0, 1, y, x) == s.flow.at(0, 1, sy, sx));
      }
  }
  CHECK(flips > 0);
  CHECK(flips < 40);
}

TEST_CASE("flipping twice is the identity") {
  const FrameSample s = random_sample(9, 9, 5);
  AugmentParams p;
  p.crop = 9;
  p.flip = true;
  const FrameSample twice = apply_augment(apply_augment(s, p), p);
  CHECK(twice.image == s.image);
  CHECK(twice.flow == s.flow);
  CHECK(twice.mask() == s.mask());
}

TEST_CASE("colour jitter touches the image only") {
  const FrameSample s = random_sample(8, 8, 6);
  AugmentParams p;
  p.crop = 8;
  p.jitter = true;
  p.gain = {1.2, 0.9, 1.0};
  p.bias = {0.05, -0.05, 0.0};
  const FrameSample a = apply_augment(s, p);
  CHECK(a.flow == s.flow);
  CHECK(a.mask() == s.mask());
  CHECK(a.image != s.image);
  CHECK(a.image.at(0, 1, 3, 3) == doctest::Approx(std::clamp(0.9 * s.image.at(0, 1, 3, 3) - 0.05, 0.0, 1.0)));
  for (double v : a.image.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("crop larger than the sample") {
  const FrameSample s = random_sample(10, 20, 7);
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(augment(s, 11, rng), Error);
  AugmentParams p;
  p.crop = 8;
  p.y0 = 3;
  CHECK_THROWS_AS(apply_augment(s, p), Error);
}

TEST_CASE("unlabeled samples augment without touching labels") {
  FrameSample s = random_sample(10, 10, 8);
  s.withhold_mask();
  std::mt19937_64 rng(2);
  const FrameSample a = augment(s, 6, rng);
  CHECK_FALSE(a.has_mask());
}

TEST_CASE("the u negation is the physically right flip") {
  SyntheticSpec spec;
  spec.height = 40;
  spec.width = 48;
  spec.length = 3;
  spec.motions = {{2.0, 1.0, 0.0}};
  spec.seed = 9;
  const auto seq = generate_synthetic_sequence(spec);
  const FrameSample& cur = seq.samples[1];
  const Tensor& prev = seq.samples[0].image;

  AugmentParams p;
  p.crop = 40;
  p.x0 = 4;
  p.flip = true;
  FrameSample prev_sample = cur;
  prev_sample.image = prev;
  const FrameSample a = apply_augment(cur, p);
  const FrameSample b = apply_augment(prev_sample, p);
  const Tensor plain = cur.image.crop(0, 4, 40, 40);
  const double base = warp_residual(prev.crop(0, 4, 40, 40), plain, cur.flow.crop(0, 4, 40, 40),
                                    cur.mask().crop(0, 4, 40, 40));
  const double flipped = warp_residual(b.image, a.image, a.flow, a.mask());
  CHECK(flipped == doctest::Approx(base).epsilon(1e-9));

  Tensor unnegated = a.flow;
  for (double& u : unnegated.plane(0, 0)) u = -u;
  CHECK(warp_residual(b.image, a.image, unnegated, a.mask()) > flipped + 0.01);
}

TEST_CASE("third flow channel of ones") {
  std::mt19937_64 rng(3);
  const Tensor f = random_tensor(2, 2, 5, 4, rng, -3, 3);
  const Tensor p = pad_flow_channels(f);
  CHECK(p.c() == 3);
  for (int n = 0; n < 2; ++n) {
    for (int c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < p.plane_size(); ++i) CHECK(p.plane(n, c)[i] == f.plane(n, c)[i]);
    for (double v : p.plane(n, 2)) CHECK(v == 1.0);
  }
  const Tensor z = pad_flow_channels(Tensor(1, 2, 384, 384));
  CHECK(z.h() == 384);
  CHECK(z.at(0, 0, 7, 9) == 0.0);
  CHECK(z.at(0, 2, 7, 9) == 1.0);
  CHECK_THROWS_AS(pad_flow_channels(Tensor(1, 3, 2, 2)), Error);
}
