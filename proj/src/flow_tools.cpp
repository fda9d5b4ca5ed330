#include "vosda/flow_tools.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include <opencv2/imgproc.hpp>

#include "vosda/error.hpp"

namespace vosda {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// RY, YG, GC, CB, BM, MR segments of the Middlebury wheel.
std::vector<std::array<double, 3>> color_wheel() {
  const int segments[6] = {15, 6, 4, 11, 13, 6};
  std::vector<std::array<double, 3>> wheel;
  for (int i = 0; i < segments[0]; ++i) wheel.push_back({255, 255.0 * i / segments[0], 0});
  for (int i = 0; i < segments[1]; ++i) wheel.push_back({255 - 255.0 * i / segments[1], 255, 0});
  for (int i = 0; i < segments[2]; ++i) wheel.push_back({0, 255, 255.0 * i / segments[2]});
  for (int i = 0; i < segments[3]; ++i) wheel.push_back({0, 255 - 255.0 * i / segments[3], 255});
  for (int i = 0; i < segments[4]; ++i) wheel.push_back({255.0 * i / segments[4], 0, 255});
  for (int i = 0; i < segments[5]; ++i) wheel.push_back({255, 0, 255 - 255.0 * i / segments[5]});
  return wheel;
}

}  // namespace

std::string flow_info(const FlowField& flow) {
  const FlowStats s = flow_stats(flow);
  return std::to_string(s.height) + "\xC3\x97" + std::to_string(s.width) +
         ", max |v| = " + num(s.max_magnitude) + "\nmean |v| = " + num(s.mean_magnitude) +
         "\nmax |u| = " + num(s.max_abs_u) + "\nmax |v_y| = " + num(s.max_abs_v) + "\n";
}

Tensor flow_to_color(const FlowField& flow, double max_magnitude) {
  static const auto wheel = color_wheel();
  const int ncols = static_cast<int>(wheel.size());
  double scale = max_magnitude > 0.0 ? max_magnitude : flow_stats(flow).max_magnitude;
  if (scale <= 0.0) scale = 1.0;
  Tensor out(1, 3, flow.height, flow.width);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const double u = flow.u(y, x) / scale;
      const double v = flow.v(y, x) / scale;
      const double rad = std::min(1.0, std::hypot(u, v));
      const double a = std::atan2(-v, -u) / std::numbers::pi;
      const double fk = (a + 1.0) / 2.0 * (ncols - 1);
      const int k0 = static_cast<int>(std::floor(fk));
      const int k1 = (k0 + 1) % ncols;
      const double f = fk - k0;
      for (int c = 0; c < 3; ++c) {
        const double col = ((1.0 - f) * wheel[k0][c] + f * wheel[k1][c]) / 255.0;
        out.at(0, c, y, x) = 1.0 - rad * (1.0 - col);
      }
    }
  }
  return out;
}

FlowField crop_flow(const FlowField& flow, int y0, int x0, int height, int width) {
  if (y0 < 0 || x0 < 0 || height <= 0 || width <= 0 || y0 + height > flow.height ||
      x0 + width > flow.width) {
    throw Error(ErrorCode::kCropTooLarge, "crop window outside the flow field");
  }
  FlowField out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      out.u(y, x) = flow.u(y0 + y, x0 + x);
      out.v(y, x) = flow.v(y0 + y, x0 + x);
    }
  return out;
}

FlowField resize_flow(const FlowField& flow, int height, int width) {
  if (height <= 0 || width <= 0) throw Error(ErrorCode::kUsage, "target size must be positive");
  cv::Mat src(flow.height, flow.width, CV_32FC2, const_cast<float*>(flow.uv.data()));
  cv::Mat dst;
  cv::resize(src, dst, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
  const float sx = static_cast<float>(width) / static_cast<float>(flow.width);
  const float sy = static_cast<float>(height) / static_cast<float>(flow.height);
  FlowField out(width, height);
  for (int y = 0; y < height; ++y) {
    const auto* row = dst.ptr<cv::Vec2f>(y);
    for (int x = 0; x < width; ++x) {
      out.u(y, x) = row[x][0] * sx;
      out.v(y, x) = row[x][1] * sy;
    }
  }
  return out;
}

}  // namespace vosda
