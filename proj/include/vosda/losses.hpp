#pragma once

#include "vosda/tensor.hpp"

namespace vosda {

struct LossWeights {
  double alpha1 = 0.5;  // main mask loss
  double alpha2 = 0.5;  // flow-branch mask loss
  double beta1 = 1.0;   // confusion loss, separated regime
  double beta2 = 0.5;   // discriminator loss, separated regime
  double lambda1 = 0.0; // confusion loss, shared regime (scheduled)
  double lambda2 = 0.5; // discriminator loss, shared regime
  double eps = 1e-6;    // probability clamp inside every log

  void validate() const;
};

// Binary cross-entropy averaged over every pixel of every sample, with the
// prediction clamped to [eps, 1 - eps].
double mask_loss(const Tensor& target, const Tensor& prob, double eps);
Tensor mask_loss_grad(const Tensor& target, const Tensor& prob, double eps);

// alpha1 * mask_loss(Y, main) + alpha2 * mask_loss(Y, flow)
double supervised_loss(const Tensor& target, const Tensor& prob_main, const Tensor& prob_flow,
                       const LossWeights& w);

// -mean(log D(X_T)): small when the discriminator takes target features for
// source ones.
double confusion_loss(const Tensor& d_target, double eps);
Tensor confusion_loss_grad(const Tensor& d_target, double eps);

// -mean(log D(X_S)) - mean(log(1 - D(X_T)))
double discriminator_loss(const Tensor& d_source, const Tensor& d_target, double eps);
Tensor discriminator_loss_grad_source(const Tensor& d_source, double eps);
Tensor discriminator_loss_grad_target(const Tensor& d_target, double eps);

double uda_loss(double l_ent, double l_d, const LossWeights& w);
double shared_loss(double l_s, double l_ent, double l_d, const LossWeights& w);

// Fraction of samples the discriminator assigns to the right domain at 0.5.
double discriminator_accuracy(const Tensor& d_source, const Tensor& d_target);

}  // namespace vosda
