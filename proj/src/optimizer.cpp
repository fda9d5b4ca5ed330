#include "vosda/optimizer.hpp"

#include <cmath>

#include "vosda/error.hpp"

namespace vosda {

void Sgd::step(const std::vector<Parameter*>& params, const SgdOptions& options) {
  for (const Parameter* p : params) {
    for (double g : p->grad) {
      if (!std::isfinite(g)) throw Error(ErrorCode::kNonFiniteGradient, p->name);
    }
  }
  for (Parameter* p : params) {
    auto& v = velocity_[p->name];
    if (v.size() != p->value.size()) v.assign(p->value.size(), 0.0);
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      v[i] = options.momentum * v[i] + (p->grad[i] + options.weight_decay * p->value[i]);
      p->value[i] -= options.lr * v[i];
    }
  }
}

double lr_schedule(double base_lr, int epoch, double decay_factor) {
  if (epoch < 0) throw Error(ErrorCode::kUsage, "epoch must be >= 0");
  return base_lr * std::pow(decay_factor, epoch);
}

double lambda1_schedule(int epoch, int max_epoch) {
  if (max_epoch <= 0 || epoch < 0 || epoch > max_epoch) {
    throw Error(ErrorCode::kUsage, "lambda1 schedule needs 0 <= epoch <= max_epoch");
  }
  return static_cast<double>(epoch) / static_cast<double>(max_epoch);
}

}  // namespace vosda
