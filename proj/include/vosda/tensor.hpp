#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vosda {

// Dense NCHW block of doubles. Used for images, flow, masks, feature maps and
// gradients alike; a single sample is a tensor with n == 1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w, double fill = 0.0);

  static Tensor like(const Tensor& other, double fill = 0.0) {
    return Tensor(other.n(), other.c(), other.h(), other.w(), fill);
  }

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t plane_size() const { return static_cast<std::size_t>(h_) * w_; }
  std::size_t sample_size() const { return plane_size() * c_; }

  double& at(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
  double at(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }

  std::size_t index(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * c_ + c) * h_ + y) * w_ + x;
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  std::span<double> sample(int n) { return {data_.data() + n * sample_size(), sample_size()}; }
  std::span<const double> sample(int n) const {
    return {data_.data() + n * sample_size(), sample_size()};
  }
  std::span<double> plane(int n, int c) {
    return {data_.data() + index(n, c, 0, 0), plane_size()};
  }
  std::span<const double> plane(int n, int c) const {
    return {data_.data() + index(n, c, 0, 0), plane_size()};
  }

  bool same_shape(const Tensor& other) const {
    return n_ == other.n_ && c_ == other.c_ && h_ == other.h_ && w_ == other.w_;
  }
  std::string shape_string() const;

  void fill(double value);
  Tensor& operator+=(const Tensor& other);
  bool operator==(const Tensor& other) const = default;

  // Copies sample `index` out as a batch of one.
  Tensor slice(int index) const;
  // Spatial window [y0, y0+h) x [x0, x0+w) of every sample and channel.
  Tensor crop(int y0, int x0, int h, int w) const;
  Tensor flip_horizontal() const;

  static Tensor stack(std::span<const Tensor> samples);
  static Tensor concat_channels(const Tensor& a, const Tensor& b);
  // Inverse of concat_channels: the first `channels` channels and the rest.
  static std::pair<Tensor, Tensor> split_channels(const Tensor& t, int channels);

  bool all_finite() const;

 private:
  int n_ = 0;
  int c_ = 0;
  int h_ = 0;
  int w_ = 0;
  std::vector<double> data_;
};

// Throws ShapeError naming `what` when the shapes differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace vosda
