#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vosda/tensor.hpp"

namespace vosda {

// A named, shape-tagged trainable array with its accumulated gradient.
struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Parameter() = default;
  Parameter(std::string name, std::vector<int> shape);

  std::size_t size() const { return value.size(); }
  void zero_grad();
};

// 2-D convolution with zero padding, square kernel, bias.
// Weight layout is [out, in, k, k].
class Conv2d {
 public:
  struct Cache {
    Tensor input;
  };

  Conv2d() = default;
  Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride,
         int padding);

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int stride() const { return stride_; }
  int output_size(int input_size) const { return (input_size + 2 * pad_ - k_) / stride_ + 1; }

  // Fan-in scaled (He) normal initialisation; biases start at zero.
  void initialize(std::mt19937_64& rng);

  // `cache` may be null when no backward pass will follow.
  Tensor forward(const Tensor& x, Cache* cache) const;
  // Accumulates into weight.grad / bias.grad. Returns dL/dx when
  // `need_input_grad`, otherwise an empty tensor.
  Tensor backward(const Tensor& grad_out, const Cache& cache, bool need_input_grad);

  Parameter weight;
  Parameter bias;

 private:
  int in_ = 0;
  int out_ = 0;
  int k_ = 1;
  int stride_ = 1;
  int pad_ = 0;
};

Tensor relu(const Tensor& x);
// Gradient through a ReLU given its output.
Tensor relu_backward(const Tensor& grad_out, const Tensor& activated);

Tensor sigmoid(const Tensor& x);
Tensor sigmoid_backward(const Tensor& grad_out, const Tensor& activated);

// 2x bilinear upsampling with half-pixel centres (align_corners = false).
Tensor upsample2x(const Tensor& x);
Tensor upsample2x_backward(const Tensor& grad_out);

// [n, c, h, w] -> [n, c, 1, 1]
Tensor global_average_pool(const Tensor& x);
Tensor global_average_pool_backward(const Tensor& grad_out, int h, int w);

Tensor multiply(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);

// Pads bottom/right by reflection so both spatial dims become multiples of
// `multiple`. Pads larger than the image fall back to edge replication.
Tensor reflect_pad_to_multiple(const Tensor& x, int multiple);

}  // namespace vosda
