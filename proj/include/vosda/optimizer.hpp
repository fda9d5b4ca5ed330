#pragma once

#include <map>
#include <string>
#include <vector>

#include "vosda/layers.hpp"

namespace vosda {

struct SgdOptions {
  double lr = 0.004;
  double momentum = 0.9;
  double weight_decay = 1e-4;
};

// Classical momentum SGD with L2 weight decay folded into the gradient:
//   v <- momentum * v + (grad + wd * p);  p <- p - lr * v
// Velocity buffers are keyed by parameter name.
class Sgd {
 public:
  // Throws NonFiniteGradient naming the parameter; nothing is updated then.
  void step(const std::vector<Parameter*>& params, const SgdOptions& options);

  std::map<std::string, std::vector<double>>& state() { return velocity_; }
  const std::map<std::string, std::vector<double>>& state() const { return velocity_; }

 private:
  std::map<std::string, std::vector<double>> velocity_;
};

// base_lr * decay^epoch
double lr_schedule(double base_lr, int epoch, double decay_factor);

// epoch / max_epoch
double lambda1_schedule(int epoch, int max_epoch);

}  // namespace vosda
