#include "vosda/losses.hpp"

#include <algorithm>
#include <cmath>

#include "vosda/error.hpp"

namespace vosda {

namespace {

double clamp_prob(double p, double eps) { return std::clamp(p, eps, 1.0 - eps); }

bool clamped(double p, double eps) { return p < eps || p > 1.0 - eps; }

double mean_neg_log(const Tensor& probs, double eps, bool complement) {
  if (probs.empty()) throw Error(ErrorCode::kEmptyInput, "loss over an empty batch");
  double sum = 0.0;
  for (double p : probs.values()) {
    const double q = clamp_prob(p, eps);
    sum -= std::log(complement ? 1.0 - q : q);
  }
  return sum / static_cast<double>(probs.size());
}

Tensor mean_neg_log_grad(const Tensor& probs, double eps, bool complement) {
  Tensor g = Tensor::like(probs);
  const double inv = 1.0 / static_cast<double>(probs.size());
  auto pv = probs.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (clamped(pv[i], eps)) continue;
    gv[i] = complement ? inv / (1.0 - pv[i]) : -inv / pv[i];
  }
  return g;
}

}  // namespace

void LossWeights::validate() const {
  for (double v : {alpha1, alpha2, beta1, beta2, lambda1, lambda2}) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kConfigError, "loss weights must be >= 0");
  }
  if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorCode::kConfigError, "eps must be in (0, 0.5)");
}

double mask_loss(const Tensor& target, const Tensor& prob, double eps) {
  require_same_shape(target, prob, "mask_loss");
  if (prob.empty()) throw Error(ErrorCode::kEmptyInput, "mask_loss over an empty mask");
  auto y = target.values();
  auto p = prob.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = clamp_prob(p[i], eps);
    sum -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
  }
  return sum / static_cast<double>(p.size());
}

Tensor mask_loss_grad(const Tensor& target, const Tensor& prob, double eps) {
  require_same_shape(target, prob, "mask_loss_grad");
  Tensor g = Tensor::like(prob);
  auto y = target.values();
  auto p = prob.values();
  auto gv = g.values();
  const double inv = 1.0 / static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (clamped(p[i], eps)) continue;
    gv[i] = inv * (-y[i] / p[i] + (1.0 - y[i]) / (1.0 - p[i]));
  }
  return g;
}

double supervised_loss(const Tensor& target, const Tensor& prob_main, const Tensor& prob_flow,
                       const LossWeights& w) {
  require_same_shape(target, prob_main, "supervised_loss main");
  require_same_shape(target, prob_flow, "supervised_loss flow");
  return w.alpha1 * mask_loss(target, prob_main, w.eps) +
         w.alpha2 * mask_loss(target, prob_flow, w.eps);
}

double confusion_loss(const Tensor& d_target, double eps) {
  return mean_neg_log(d_target, eps, false);
}

Tensor confusion_loss_grad(const Tensor& d_target, double eps) {
  return mean_neg_log_grad(d_target, eps, false);
}

double discriminator_loss(const Tensor& d_source, const Tensor& d_target, double eps) {
  // The source term is the confusion loss itself: -mean(log x).
  return confusion_loss(d_source, eps) + mean_neg_log(d_target, eps, true);
}

Tensor discriminator_loss_grad_source(const Tensor& d_source, double eps) {
  return mean_neg_log_grad(d_source, eps, false);
}

Tensor discriminator_loss_grad_target(const Tensor& d_target, double eps) {
  return mean_neg_log_grad(d_target, eps, true);
}

double uda_loss(double l_ent, double l_d, const LossWeights& w) {
  return w.beta1 * l_ent + w.beta2 * l_d;
}

double shared_loss(double l_s, double l_ent, double l_d, const LossWeights& w) {
  return l_s + w.lambda1 * l_ent + w.lambda2 * l_d;
}

double discriminator_accuracy(const Tensor& d_source, const Tensor& d_target) {
  std::size_t correct = 0;
  for (double p : d_source.values()) correct += p > 0.5 ? 1 : 0;
  for (double p : d_target.values()) correct += p < 0.5 ? 1 : 0;
  const std::size_t total = d_source.size() + d_target.size();
  if (total == 0) throw Error(ErrorCode::kEmptyInput, "discriminator accuracy of nothing");
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace vosda
