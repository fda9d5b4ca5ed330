#include "vosda/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vosda/error.hpp"

namespace vosda {

Tensor::Tensor(int n, int c, int h, int w, double fill)
    : n_(n), c_(c), h_(h), w_(w) {
  if (n < 0 || c < 0 || h < 0 || w < 0) {
    throw Error(ErrorCode::kShapeError, "negative tensor dimension");
  }
  data_.assign(static_cast<std::size_t>(n) * c * h * w, fill);
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '[' << n_ << 'x' << c_ << 'x' << h_ << 'x' << w_ << ']';
  return os.str();
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor& Tensor::operator+=(const Tensor& other) {
  require_same_shape(*this, other, "tensor +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor Tensor::slice(int index) const {
  Tensor out(1, c_, h_, w_);
  auto src = sample(index);
  std::copy(src.begin(), src.end(), out.data_.begin());
  return out;
}

Tensor Tensor::crop(int y0, int x0, int h, int w) const {
  if (y0 < 0 || x0 < 0 || y0 + h > h_ || x0 + w > w_) {
    throw Error(ErrorCode::kShapeError, "crop window outside " + shape_string());
  }
  Tensor out(n_, c_, h, w);
  for (int n = 0; n < n_; ++n)
    for (int c = 0; c < c_; ++c)
      for (int y = 0; y < h; ++y) {
        const double* src = &data_[index(n, c, y0 + y, x0)];
        std::copy(src, src + w, &out.at(n, c, y, 0));
      }
  return out;
}

Tensor Tensor::flip_horizontal() const {
  Tensor out = Tensor::like(*this);
  for (int n = 0; n < n_; ++n)
    for (int c = 0; c < c_; ++c)
      for (int y = 0; y < h_; ++y)
        for (int x = 0; x < w_; ++x) out.at(n, c, y, w_ - 1 - x) = at(n, c, y, x);
  return out;
}

Tensor Tensor::stack(std::span<const Tensor> samples) {
  if (samples.empty()) return {};
  const Tensor& first = samples.front();
  int total = 0;
  for (const auto& s : samples) {
    if (s.c_ != first.c_ || s.h_ != first.h_ || s.w_ != first.w_) {
      throw Error(ErrorCode::kShapeError, "stack of mismatched samples " + s.shape_string() +
                                              " vs " + first.shape_string());
    }
    total += s.n_;
  }
  Tensor out(total, first.c_, first.h_, first.w_);
  auto it = out.data_.begin();
  for (const auto& s : samples) it = std::copy(s.data_.begin(), s.data_.end(), it);
  return out;
}

Tensor Tensor::concat_channels(const Tensor& a, const Tensor& b) {
  if (a.n_ != b.n_ || a.h_ != b.h_ || a.w_ != b.w_) {
    throw Error(ErrorCode::kShapeError,
                "channel concat of " + a.shape_string() + " and " + b.shape_string());
  }
  Tensor out(a.n_, a.c_ + b.c_, a.h_, a.w_);
  for (int n = 0; n < a.n_; ++n) {
    auto sa = a.sample(n);
    auto sb = b.sample(n);
    auto dst = out.sample(n);
    std::copy(sa.begin(), sa.end(), dst.begin());
    std::copy(sb.begin(), sb.end(), dst.begin() + static_cast<std::ptrdiff_t>(sa.size()));
  }
  return out;
}

std::pair<Tensor, Tensor> Tensor::split_channels(const Tensor& t, int channels) {
  if (channels < 0 || channels > t.c_) {
    throw Error(ErrorCode::kShapeError, "channel split out of range");
  }
  Tensor a(t.n_, channels, t.h_, t.w_);
  Tensor b(t.n_, t.c_ - channels, t.h_, t.w_);
  for (int n = 0; n < t.n_; ++n) {
    auto src = t.sample(n);
    auto da = a.sample(n);
    auto db = b.sample(n);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(da.size()), da.begin());
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(da.size()), src.end(), db.begin());
  }
  return {std::move(a), std::move(b)};
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kShapeError,
                std::string(what) + ": " + a.shape_string() + " vs " + b.shape_string());
  }
}

}  // namespace vosda
