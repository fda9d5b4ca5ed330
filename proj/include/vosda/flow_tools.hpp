#pragma once

#include <string>

#include "vosda/flo.hpp"
#include "vosda/tensor.hpp"

namespace vosda {

// "HxW, max |v| = M" on the first line, then the remaining statistics.
std::string flow_info(const FlowField& flow);

// Middlebury colour-wheel rendering, [1, 3, H, W] in [0, 1]. Hue encodes
// direction and saturation magnitude relative to `max_magnitude` (0: the
// field's own maximum). Zero flow renders white.
Tensor flow_to_color(const FlowField& flow, double max_magnitude = 0.0);

FlowField crop_flow(const FlowField& flow, int y0, int x0, int height, int width);

// Bilinear resampling; vectors are scaled with the grid.
FlowField resize_flow(const FlowField& flow, int height, int width);

}  // namespace vosda
