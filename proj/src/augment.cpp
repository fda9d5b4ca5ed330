#include "vosda/augment.hpp"

#include <algorithm>

#include "vosda/error.hpp"

namespace vosda {

AugmentParams draw_augment_params(int height, int width, int crop, std::mt19937_64& rng,
                                  const AugmentOptions& options) {
  if (crop <= 0 || crop > std::min(height, width)) {
    throw Error(ErrorCode::kCropTooLarge, "crop " + std::to_string(crop) + " exceeds " +
                                              std::to_string(height) + "x" + std::to_string(width));
  }
  AugmentParams p;
  p.crop = crop;
  p.y0 = std::uniform_int_distribution<int>(0, height - crop)(rng);
  p.x0 = std::uniform_int_distribution<int>(0, width - crop)(rng);
  p.flip = options.flip && std::bernoulli_distribution(0.5)(rng);
  p.jitter = options.color_jitter;
  if (p.jitter) {
    std::uniform_real_distribution<double> gain(options.gain_min, options.gain_max);
    std::uniform_real_distribution<double> bias(options.bias_min, options.bias_max);
    for (int c = 0; c < 3; ++c) {
      p.gain[c] = gain(rng);
      p.bias[c] = bias(rng);
    }
  }
  return p;
}

FrameSample apply_augment(const FrameSample& sample, const AugmentParams& params) {
  if (params.crop > std::min(sample.height(), sample.width()) ||
      params.y0 + params.crop > sample.height() || params.x0 + params.crop > sample.width()) {
    throw Error(ErrorCode::kCropTooLarge, "crop window outside the sample");
  }
  FrameSample out = sample;
  out.image = sample.image.crop(params.y0, params.x0, params.crop, params.crop);
  out.flow = sample.flow.crop(params.y0, params.x0, params.crop, params.crop);
  if (sample.has_mask()) {
    out.set_mask(sample.mask().crop(params.y0, params.x0, params.crop, params.crop));
  }
  if (params.flip) {
    out.image = out.image.flip_horizontal();
    out.flow = out.flow.flip_horizontal();
    for (double& u : out.flow.plane(0, 0)) u = -u;
    if (out.has_mask()) out.set_mask(out.mask().flip_horizontal());
  }
  if (params.jitter) {
    for (int c = 0; c < 3; ++c)
      for (double& v : out.image.plane(0, c))
        v = std::clamp(params.gain[c] * v + params.bias[c], 0.0, 1.0);
  }
  return out;
}

FrameSample augment(const FrameSample& sample, int crop, std::mt19937_64& rng,
                    const AugmentOptions& options) {
  return apply_augment(sample, draw_augment_params(sample.height(), sample.width(), crop, rng,
                                                   options));
}

Tensor pad_flow_channels(const Tensor& flow) {
  if (flow.c() != 2) throw Error(ErrorCode::kShapeError, "flow must have 2 channels");
  Tensor out(flow.n(), 3, flow.h(), flow.w(), 1.0);
  for (int n = 0; n < flow.n(); ++n)
    for (int c = 0; c < 2; ++c) {
      auto src = flow.plane(n, c);
      std::copy(src.begin(), src.end(), out.plane(n, c).begin());
    }
  return out;
}

}  // namespace vosda
