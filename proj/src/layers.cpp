#include "vosda/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "vosda/error.hpp"

namespace vosda {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

// Unfolds one sample into a [in*k*k, out_h*out_w] column matrix.
void im2col(const double* src, int channels, int h, int w, int k, int stride, int pad, int out_h,
            int out_w, double* cols) {
  const int plane = out_h * out_w;
  for (int c = 0; c < channels; ++c) {
    const double* img = src + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = cols + (static_cast<std::size_t>((c * k + ky) * k + kx)) * plane;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          double* dst = row + oy * out_w;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + out_w, 0.0);
            continue;
          }
          const double* line = img + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst[ox] = (ix >= 0 && ix < w) ? line[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, int channels, int h, int w, int k, int stride, int pad,
            int out_h, int out_w, double* dst) {
  const int plane = out_h * out_w;
  for (int c = 0; c < channels; ++c) {
    double* img = dst + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = cols + (static_cast<std::size_t>((c * k + ky) * k + kx)) * plane;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          double* line = img + static_cast<std::size_t>(iy) * w;
          const double* src = row + oy * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) line[ix] += src[ox];
          }
        }
      }
    }
  }
}

// Interpolation taps for one axis of a 2x half-pixel upsample.
struct Taps {
  std::vector<int> lo, hi;
  std::vector<double> wlo, whi;
};

Taps upsample_taps(int in_size) {
  Taps t;
  const int out_size = in_size * 2;
  t.lo.resize(out_size);
  t.hi.resize(out_size);
  t.wlo.resize(out_size);
  t.whi.resize(out_size);
  for (int o = 0; o < out_size; ++o) {
    double src = (o + 0.5) / 2.0 - 0.5;
    if (src < 0.0) src = 0.0;
    int i0 = static_cast<int>(std::floor(src));
    i0 = std::min(i0, in_size - 1);
    const int i1 = std::min(i0 + 1, in_size - 1);
    const double frac = src - i0;
    t.lo[o] = i0;
    t.hi[o] = i1;
    t.wlo[o] = 1.0 - frac;
    t.whi[o] = frac;
  }
  return t;
}

int reflect_index(int i, int size) {
  if (size == 1) return 0;
  const int period = 2 * (size - 1);
  i %= period;
  if (i < 0) i += period;
  return i < size ? i : period - i;
}

}  // namespace

Parameter::Parameter(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
  std::size_t count = 1;
  for (int d : shape) count *= static_cast<std::size_t>(d);
  value.assign(count, 0.0);
  grad.assign(count, 0.0);
}

void Parameter::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

Conv2d::Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride,
               int padding)
    : weight(name + ".w", {out_channels, in_channels, kernel, kernel}),
      bias(name + ".b", {out_channels}),
      in_(in_channels),
      out_(out_channels),
      k_(kernel),
      stride_(stride),
      pad_(padding) {}

void Conv2d::initialize(std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(in_) * k_ * k_;
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
  for (double& v : weight.value) v = dist(rng);
  std::fill(bias.value.begin(), bias.value.end(), 0.0);
}

Tensor Conv2d::forward(const Tensor& x, Cache* cache) const {
  if (x.c() != in_) {
    throw Error(ErrorCode::kShapeError, weight.name + " expects " + std::to_string(in_) +
                                            " input channels, got " + x.shape_string());
  }
  const int out_h = output_size(x.h());
  const int out_w = output_size(x.w());
  if (out_h <= 0 || out_w <= 0) {
    throw Error(ErrorCode::kShapeError, weight.name + " input too small: " + x.shape_string());
  }
  const int rows = in_ * k_ * k_;
  const int plane = out_h * out_w;
  Tensor y(x.n(), out_, out_h, out_w);
  std::vector<double> cols(static_cast<std::size_t>(rows) * plane);
  ConstMatrixMap w(weight.value.data(), out_, rows);
  Eigen::Map<const Eigen::VectorXd> b(bias.value.data(), out_);
  for (int n = 0; n < x.n(); ++n) {
    const double* src = x.sample(n).data();
    const bool pointwise = (k_ == 1 && stride_ == 1 && pad_ == 0);
    if (!pointwise) {
      im2col(src, in_, x.h(), x.w(), k_, stride_, pad_, out_h, out_w, cols.data());
    }
    ConstMatrixMap c(pointwise ? src : cols.data(), rows, plane);
    MatrixMap out(y.sample(n).data(), out_, plane);
    out.noalias() = w * c;
    out.colwise() += b;
  }
  if (cache) cache->input = x;
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_out, const Cache& cache, bool need_input_grad) {
  const Tensor& x = cache.input;
  const int out_h = grad_out.h();
  const int out_w = grad_out.w();
  const int rows = in_ * k_ * k_;
  const int plane = out_h * out_w;
  const bool pointwise = (k_ == 1 && stride_ == 1 && pad_ == 0);
  std::vector<double> cols(static_cast<std::size_t>(rows) * plane);
  std::vector<double> dcols(need_input_grad ? cols.size() : 0);
  ConstMatrixMap w(weight.value.data(), out_, rows);
  MatrixMap dw(weight.grad.data(), out_, rows);
  Eigen::Map<Eigen::VectorXd> db(bias.grad.data(), out_);
  Tensor dx;
  if (need_input_grad) dx = Tensor::like(x);
  for (int n = 0; n < x.n(); ++n) {
    const double* src = x.sample(n).data();
    if (!pointwise) im2col(src, in_, x.h(), x.w(), k_, stride_, pad_, out_h, out_w, cols.data());
    ConstMatrixMap c(pointwise ? src : cols.data(), rows, plane);
    ConstMatrixMap g(grad_out.sample(n).data(), out_, plane);
    dw.noalias() += g * c.transpose();
    // Plain loop: Eigen's vectorised row sums depend on buffer alignment,
    // which would make runs differ in the last bits.
    for (int o = 0; o < out_; ++o) {
      const double* row = g.data() + static_cast<std::size_t>(o) * plane;
      double s = 0.0;
      for (int i = 0; i < plane; ++i) s += row[i];
      db[o] += s;
    }
    if (need_input_grad) {
      if (pointwise) {
        MatrixMap dst(dx.sample(n).data(), rows, plane);
        dst.noalias() = w.transpose() * g;
      } else {
        MatrixMap dc(dcols.data(), rows, plane);
        dc.noalias() = w.transpose() * g;
        col2im(dcols.data(), in_, x.h(), x.w(), k_, stride_, pad_, out_h, out_w,
               dx.sample(n).data());
      }
    }
  }
  return dx;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& grad_out, const Tensor& activated) {
  Tensor g = grad_out;
  auto a = activated.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < gv.size(); ++i)
    if (a[i] <= 0.0) gv[i] = 0.0;
  return g;
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = 1.0 / (1.0 + std::exp(-v));
  return y;
}

Tensor sigmoid_backward(const Tensor& grad_out, const Tensor& activated) {
  Tensor g = grad_out;
  auto a = activated.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= a[i] * (1.0 - a[i]);
  return g;
}

Tensor upsample2x(const Tensor& x) {
  const Taps ty = upsample_taps(x.h());
  const Taps tx = upsample_taps(x.w());
  const int oh = x.h() * 2;
  const int ow = x.w() * 2;
  Tensor y(x.n(), x.c(), oh, ow);
  std::vector<double> rows(static_cast<std::size_t>(x.h()) * ow);
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      auto src = x.plane(n, c);
      for (int iy = 0; iy < x.h(); ++iy) {
        const double* line = src.data() + static_cast<std::size_t>(iy) * x.w();
        double* dst = rows.data() + static_cast<std::size_t>(iy) * ow;
        for (int ox = 0; ox < ow; ++ox)
          dst[ox] = tx.wlo[ox] * line[tx.lo[ox]] + tx.whi[ox] * line[tx.hi[ox]];
      }
      auto out = y.plane(n, c);
      for (int oy = 0; oy < oh; ++oy) {
        const double* a = rows.data() + static_cast<std::size_t>(ty.lo[oy]) * ow;
        const double* b = rows.data() + static_cast<std::size_t>(ty.hi[oy]) * ow;
        double* dst = out.data() + static_cast<std::size_t>(oy) * ow;
        for (int ox = 0; ox < ow; ++ox) dst[ox] = ty.wlo[oy] * a[ox] + ty.whi[oy] * b[ox];
      }
    }
  }
  return y;
}

Tensor upsample2x_backward(const Tensor& grad_out) {
  const int ih = grad_out.h() / 2;
  const int iw = grad_out.w() / 2;
  const Taps ty = upsample_taps(ih);
  const Taps tx = upsample_taps(iw);
  const int ow = grad_out.w();
  Tensor dx(grad_out.n(), grad_out.c(), ih, iw);
  std::vector<double> rows(static_cast<std::size_t>(ih) * ow);
  for (int n = 0; n < grad_out.n(); ++n) {
    for (int c = 0; c < grad_out.c(); ++c) {
      std::fill(rows.begin(), rows.end(), 0.0);
      auto g = grad_out.plane(n, c);
      for (int oy = 0; oy < grad_out.h(); ++oy) {
        const double* src = g.data() + static_cast<std::size_t>(oy) * ow;
        double* a = rows.data() + static_cast<std::size_t>(ty.lo[oy]) * ow;
        double* b = rows.data() + static_cast<std::size_t>(ty.hi[oy]) * ow;
        for (int ox = 0; ox < ow; ++ox) {
          a[ox] += ty.wlo[oy] * src[ox];
          b[ox] += ty.whi[oy] * src[ox];
        }
      }
      auto out = dx.plane(n, c);
      for (int iy = 0; iy < ih; ++iy) {
        const double* src = rows.data() + static_cast<std::size_t>(iy) * ow;
        double* dst = out.data() + static_cast<std::size_t>(iy) * iw;
        for (int ox = 0; ox < ow; ++ox) {
          dst[tx.lo[ox]] += tx.wlo[ox] * src[ox];
          dst[tx.hi[ox]] += tx.whi[ox] * src[ox];
        }
      }
    }
  }
  return dx;
}

Tensor global_average_pool(const Tensor& x) {
  Tensor y(x.n(), x.c(), 1, 1);
  const double inv = 1.0 / static_cast<double>(x.plane_size());
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c) {
      double sum = 0.0;
      for (double v : x.plane(n, c)) sum += v;
      y.at(n, c, 0, 0) = sum * inv;
    }
  return y;
}

Tensor global_average_pool_backward(const Tensor& grad_out, int h, int w) {
  Tensor dx(grad_out.n(), grad_out.c(), h, w);
  const double inv = 1.0 / (static_cast<double>(h) * w);
  for (int n = 0; n < grad_out.n(); ++n)
    for (int c = 0; c < grad_out.c(); ++c) {
      const double g = grad_out.at(n, c, 0, 0) * inv;
      for (double& v : dx.plane(n, c)) v = g;
    }
  return dx;
}

Tensor multiply(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "multiply");
  Tensor y = a;
  auto bv = b.values();
  auto yv = y.values();
  for (std::size_t i = 0; i < yv.size(); ++i) yv[i] *= bv[i];
  return y;
}

Tensor add(const Tensor& a, const Tensor& b) {
  Tensor y = a;
  y += b;
  return y;
}

Tensor reflect_pad_to_multiple(const Tensor& x, int multiple) {
  const int h = (x.h() + multiple - 1) / multiple * multiple;
  const int w = (x.w() + multiple - 1) / multiple * multiple;
  if (h == x.h() && w == x.w()) return x;
  Tensor y(x.n(), x.c(), h, w);
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c)
      for (int yy = 0; yy < h; ++yy) {
        const int sy = (h - x.h() < x.h()) ? reflect_index(yy, x.h()) : std::min(yy, x.h() - 1);
        for (int xx = 0; xx < w; ++xx) {
          const int sx =
              (w - x.w() < x.w()) ? reflect_index(xx, x.w()) : std::min(xx, x.w() - 1);
          y.at(n, c, yy, xx) = x.at(n, c, sy, sx);
        }
      }
  return y;
}

}  // namespace vosda
