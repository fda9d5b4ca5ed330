#pragma once

#include <filesystem>
#include <vector>

#include "vosda/tensor.hpp"

namespace vosda {

// Middlebury optical flow: per pixel (u, v) displacement in pixels/frame,
// u horizontal, v vertical. Stored interleaved and row-major, as on disk.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> uv;

  FlowField() = default;
  FlowField(int w, int h) : width(w), height(h), uv(static_cast<std::size_t>(w) * h * 2, 0.f) {}

  float& u(int y, int x) { return uv[(static_cast<std::size_t>(y) * width + x) * 2]; }
  float& v(int y, int x) { return uv[(static_cast<std::size_t>(y) * width + x) * 2 + 1]; }
  float u(int y, int x) const { return uv[(static_cast<std::size_t>(y) * width + x) * 2]; }
  float v(int y, int x) const { return uv[(static_cast<std::size_t>(y) * width + x) * 2 + 1]; }

  bool operator==(const FlowField&) const = default;

  // [1, 2, H, W] tensor, channel 0 = u.
  Tensor to_tensor() const;
  // Rounds to float32; `t` must be [1, 2, H, W].
  static FlowField from_tensor(const Tensor& t);
};

inline constexpr float kFloMagic = 202021.25f;

// Throws MagicMismatch / TruncatedFile / IoFailure.
FlowField read_flo(const std::filesystem::path& path);
// Throws NonFiniteValue before touching the file, IoFailure when unwritable.
void write_flo(const FlowField& flow, const std::filesystem::path& path);

struct FlowStats {
  int width = 0;
  int height = 0;
  double max_magnitude = 0.0;
  double mean_magnitude = 0.0;
  double max_abs_u = 0.0;
  double max_abs_v = 0.0;
};

FlowStats flow_stats(const FlowField& flow);

}  // namespace vosda
