// Seconds-scale training setups shared by the training and checkpoint tests.
#pragma once

#include <cstdint>

#include "vosda/config.hpp"
#include "vosda/synthetic.hpp"
#include "vosda/training.hpp"

namespace vosda::testing {

inline SyntheticDatasetSpec tiny_dataset_spec(AppearanceStyle style, std::uint64_t seed) {
  SyntheticDatasetSpec spec;
  spec.n_train_sequences = 2;
  spec.n_test_sequences = 1;
  spec.sequence.height = 24;
  spec.sequence.width = 24;
  spec.sequence.min_radius = 3.0;
  spec.sequence.max_radius = 5.0;
  spec.sequence.length = 4;
  spec.sequence.style = style;
  spec.sequence.seed = seed;
  return spec;
}

// Source labels present, target labels withheld.
inline TrainData tiny_train_data(std::uint64_t seed = 3) {
  const SyntheticDataset src = generate_synthetic_dataset(tiny_dataset_spec(AppearanceStyle::kSource, seed));
  const SyntheticDataset tgt =
      generate_synthetic_dataset(tiny_dataset_spec(AppearanceStyle::kTarget, seed + 100));
  TrainData d;
  d.source_train = flatten_samples(src.train);
  d.source_val = flatten_samples(src.test);
  d.target_train = unlabeled_view(flatten_samples(tgt.train));
  d.target_val = unlabeled_view(flatten_samples(tgt.test));
  return d;
}

inline TrainConfig tiny_train_config(Regime regime = Regime::kSupervised) {
  TrainConfig c;
  c.regime = regime;
  c.epochs = 2;
  c.uda_epochs = 2;
  c.batch_size = 2;
  c.crop = 16;
  c.model.encoder_widths = {4, 8};
  c.model.decoder_widths = {8, 4};
  c.model.discriminator_widths = {8, 8, 8};
  c.m_iters = 2;
  c.n_iters = 2;
  c.val_every = 0;
  c.seed = 5;
  return c;
}

}  // namespace vosda::testing
