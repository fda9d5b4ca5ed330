#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vosda/sample.hpp"
#include "vosda/tensor.hpp"

namespace vosda {

// Appearance statistics that define a domain: background texture, object
// palette, object texture and object shape family. Static distractors always
// use the same style as the moving objects.
enum class AppearanceStyle {
  kSource,  // smooth bluish background, warm striped ellipses
  kTarget,  // brighter high-frequency background, cool checkered rectangles
};

const char* style_name(AppearanceStyle style);
AppearanceStyle parse_style(const std::string& text);

struct ObjectMotion {
  double vx = 0.0;     // pixels/frame
  double vy = 0.0;
  double omega = 0.0;  // radians/frame
};

struct SyntheticSpec {
  int height = 64;
  int width = 64;
  int n_moving_objects = 1;
  int n_static_distractors = 0;
  double min_speed = 1.0;
  double max_speed = 3.0;
  double max_rotation = 0.0;
  double min_radius = 7.0;
  double max_radius = 12.0;
  AppearanceStyle style = AppearanceStyle::kSource;
  // Target style only: 0 looks like the source domain, 1 is the full shift.
  double style_strength = 1.0;
  int length = 8;  // raw frames, including the flow anchor frame 0
  std::uint64_t seed = 1;
  std::string sequence_id = "seq000";
  // When non-empty, overrides the random motion draw of each moving object.
  std::vector<ObjectMotion> motions;

  // Throws SpecInvalid.
  void validate() const;
};

struct SyntheticSequence {
  std::string id;
  Tensor anchor_image;  // frame 0, never a sample
  Tensor anchor_mask;
  std::vector<FrameSample> samples;  // frames 1 .. length-1
  // Visible static-distractor pixels, aligned with `samples`.
  std::vector<Tensor> distractor_masks;
};

// Deterministic in `spec`. Flow of sample t is the analytic displacement of
// each moving-object pixel between frames t-1 and t, zero elsewhere; masks
// cover moving objects only.
SyntheticSequence generate_synthetic_sequence(const SyntheticSpec& spec);

// A train/test collection of sequences sharing one template spec.
struct SyntheticDatasetSpec {
  SyntheticSpec sequence;
  int n_train_sequences = 20;
  int n_test_sequences = 5;
  std::string name = "synthetic";

  void validate() const;
  std::string hash() const;
};

struct SyntheticDataset {
  std::vector<SyntheticSequence> train;
  std::vector<SyntheticSequence> test;
};

SyntheticDataset generate_synthetic_dataset(const SyntheticDatasetSpec& spec);

std::vector<FrameSample> flatten_samples(const std::vector<SyntheticSequence>& sequences);

}  // namespace vosda
