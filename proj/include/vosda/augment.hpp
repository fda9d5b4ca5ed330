#pragma once

#include <array>
#include <random>

#include "vosda/sample.hpp"

namespace vosda {

// One draw of the augmentation pipeline. The same window and flip are applied
// to image, flow and mask; jitter touches the image only.
struct AugmentParams {
  int y0 = 0;
  int x0 = 0;
  int crop = 0;
  bool flip = false;
  bool jitter = false;
  std::array<double, 3> gain{1.0, 1.0, 1.0};
  std::array<double, 3> bias{0.0, 0.0, 0.0};
};

struct AugmentOptions {
  bool flip = true;
  bool color_jitter = true;
  double gain_min = 0.8;
  double gain_max = 1.2;
  double bias_min = -0.1;
  double bias_max = 0.1;
};

// Throws CropTooLarge when crop > min(height, width).
AugmentParams draw_augment_params(int height, int width, int crop, std::mt19937_64& rng,
                                  const AugmentOptions& options = {});

// Random crop, horizontal flip (mirrors all planes and negates flow u) and
// per-channel colour jitter clamped to [0, 1].
FrameSample apply_augment(const FrameSample& sample, const AugmentParams& params);

FrameSample augment(const FrameSample& sample, int crop, std::mt19937_64& rng,
                    const AugmentOptions& options = {});

// [n, 2, H, W] -> [n, 3, H, W], third channel all ones.
Tensor pad_flow_channels(const Tensor& flow);

}  // namespace vosda
