#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vosda/tensor.hpp"

namespace vosda {

enum class Domain { kSource, kTarget };

const char* domain_name(Domain domain);

// One timestep t >= 1 of a sequence: the frame, the flow from frame t-1 to
// frame t on frame t's pixel grid, and (when labeled) the moving-object mask.
class FrameSample {
 public:
  Tensor image;  // [1, 3, H, W], values in [0, 1]
  Tensor flow;   // [1, 2, H, W], pixels/frame
  std::string sequence_id;
  int frame_index = 1;
  Domain domain = Domain::kSource;

  bool has_mask() const { return mask_.has_value() && !withheld_; }
  // Throws LabelAccess when the sample carries no label or it was withheld.
  const Tensor& mask() const;
  void set_mask(Tensor mask);
  // Drops the label; any later mask() call raises LabelAccess.
  void withhold_mask();

  int height() const { return image.h(); }
  int width() const { return image.w(); }

  // Throws ShapeError / NonFiniteValue on violated invariants.
  void validate() const;

 private:
  std::optional<Tensor> mask_;
  bool withheld_ = false;
};

// Copies of `samples` safe to hand to unsupervised code.
std::vector<FrameSample> unlabeled_view(const std::vector<FrameSample>& samples);

struct Batch {
  Tensor image;
  Tensor flow;
  Tensor mask;  // empty for unlabeled batches
};

Batch make_batch(const std::vector<const FrameSample*>& samples, bool with_masks);

}  // namespace vosda
