#pragma once

#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "vosda/tensor.hpp"

namespace vosda::testing {

// Mean absolute error between `current` and `previous` sampled at p - F(p),
// over pixels where `where` is nonzero. `flow` lives on the current grid.
inline double warp_residual(const Tensor& previous, const Tensor& current, const Tensor& flow,
                            const Tensor& where) {
  const int h = current.h(), w = current.w();
  double err = 0.0;
  long count = 0;
  for (int c = 0; c < current.c(); ++c) {
    const auto plane = previous.plane(0, c);
    const std::vector<double> prev(plane.begin(), plane.end());
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (where.at(0, 0, y, x) == 0.0) continue;
        const double sy = y - flow.at(0, 1, y, x);
        const double sx = x - flow.at(0, 0, y, x);
        err += std::abs(oracle::bilinear(prev, h, w, sy, sx) - current.at(0, c, y, x));
        ++count;
      }
  }
  return count ? err / count : 0.0;
}

}  // namespace vosda::testing
