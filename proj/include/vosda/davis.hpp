#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vosda/sample.hpp"
#include "vosda/synthetic.hpp"

namespace vosda {

namespace fs = std::filesystem;

enum class Split { kTrain, kTest };

const char* split_name(Split split);
Split parse_split(const std::string& text);

struct SequenceEntry {
  std::string id;
  std::vector<int> frame_indices;          // sorted
  std::vector<fs::path> frames;            // JPEGImages/<seq>/%05d.jpg
  std::vector<std::optional<fs::path>> masks;  // Annotations/<seq>/%05d.png
  std::vector<std::optional<fs::path>> flows;  // Flow/<seq>/%05d.flo
};

// A DAVIS-style tree:
//   <root>/JPEGImages/<seq>/%05d.jpg
//   <root>/Annotations/<seq>/%05d.png     (masks, {0,255})
//   <root>/Flow/<seq>/%05d.flo            (optional)
//   <root>/ImageSets/{train,test}.txt     (optional sequence lists)
// Without ImageSets every sequence belongs to both splits.
struct DatasetHandle {
  fs::path root;
  Split split = Split::kTrain;
  bool labeled = true;
  std::vector<SequenceEntry> sequences;

  // Frames with index >= 1 (frame 0 only anchors flow).
  std::size_t usable_samples() const;
  std::size_t annotated_samples() const;
};

// `labeled` declares that Annotations/ must exist for every sequence; an
// unlabeled handle never looks at annotation files.
// Throws LayoutError naming the first missing directory, CountMismatch when an
// annotation has no matching image in a labeled sequence.
DatasetHandle load_davis_layout(const fs::path& root, Split split, bool labeled = true);

// Reads one sample (frame position `frame` >= 1 within sequence `seq`).
// Annotation files are read only when `read_labels` is set.
FrameSample load_sample(const DatasetHandle& handle, std::size_t seq, std::size_t frame,
                        bool read_labels, Domain domain);

// Every usable sample of the handle, in order.
std::vector<FrameSample> load_samples(const DatasetHandle& handle, bool read_labels, Domain domain);

// Image helpers shared with the CLI.
Tensor read_rgb_image(const fs::path& path);
void write_rgb_image(const Tensor& image, const fs::path& path);
Tensor read_mask_png(const fs::path& path);
void write_mask_png(const Tensor& mask, const fs::path& path);

// Writes a generated dataset as a DAVIS tree plus manifest.json (seed, spec
// hash, per-file hashes). Returns the manifest hash. Refuses a non-empty
// `out_dir` unless `force`.
std::string materialize_dataset(const SyntheticDatasetSpec& spec, const SyntheticDataset& data,
                                const fs::path& out_dir, bool force);

}  // namespace vosda
