#include "vosda/sample.hpp"

#include "vosda/error.hpp"

namespace vosda {

const char* domain_name(Domain domain) {
  return domain == Domain::kSource ? "source" : "target";
}

const Tensor& FrameSample::mask() const {
  if (withheld_) {
    throw Error(ErrorCode::kLabelAccess,
                "label of " + sequence_id + "/" + std::to_string(frame_index) + " is withheld");
  }
  if (!mask_) {
    throw Error(ErrorCode::kLabelAccess,
                sequence_id + "/" + std::to_string(frame_index) + " has no annotation");
  }
  return *mask_;
}

void FrameSample::set_mask(Tensor mask) {
  mask_ = std::move(mask);
  withheld_ = false;
}

void FrameSample::withhold_mask() {
  mask_.reset();
  withheld_ = true;
}

void FrameSample::validate() const {
  if (image.n() != 1 || image.c() != 3) {
    throw Error(ErrorCode::kShapeError, "image must be [1,3,H,W], got " + image.shape_string());
  }
  if (flow.n() != 1 || flow.c() != 2 || flow.h() != image.h() || flow.w() != image.w()) {
    throw Error(ErrorCode::kShapeError, "flow " + flow.shape_string() + " vs image " +
                                            image.shape_string());
  }
  if (frame_index < 1) throw Error(ErrorCode::kShapeError, "frame_index must be >= 1");
  for (double v : image.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::kNonFiniteValue, "image value outside [0,1]");
  }
  if (!flow.all_finite()) throw Error(ErrorCode::kNonFiniteValue, "flow is not finite");
  if (mask_) {
    if (mask_->n() != 1 || mask_->c() != 1 || mask_->h() != image.h() ||
        mask_->w() != image.w()) {
      throw Error(ErrorCode::kShapeError, "mask " + mask_->shape_string());
    }
    for (double v : mask_->values()) {
      if (v != 0.0 && v != 1.0) throw Error(ErrorCode::kShapeError, "mask value not in {0,1}");
    }
  }
}

std::vector<FrameSample> unlabeled_view(const std::vector<FrameSample>& samples) {
  std::vector<FrameSample> out = samples;
  for (auto& s : out) s.withhold_mask();
  return out;
}

Batch make_batch(const std::vector<const FrameSample*>& samples, bool with_masks) {
  std::vector<Tensor> images, flows, masks;
  images.reserve(samples.size());
  flows.reserve(samples.size());
  for (const FrameSample* s : samples) {
    images.push_back(s->image);
    flows.push_back(s->flow);
    if (with_masks) masks.push_back(s->mask());
  }
  Batch b;
  b.image = Tensor::stack(images);
  b.flow = Tensor::stack(flows);
  if (with_masks) b.mask = Tensor::stack(masks);
  return b;
}

}  // namespace vosda
