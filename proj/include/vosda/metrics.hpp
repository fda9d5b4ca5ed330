#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vosda/model.hpp"
#include "vosda/sample.hpp"
#include "vosda/tensor.hpp"

namespace vosda {

// Masks here are single planes [1, 1, H, W]; any nonzero value is foreground.

// 1 where prob > threshold, else 0.
Tensor binarize(const Tensor& prob, double threshold);

// |pred & gt| / |pred | gt|, 1 when both are empty.
double jaccard(const Tensor& pred, const Tensor& gt);

// Foreground pixels with a background 4-neighbour or touching the image edge.
Tensor boundary(const Tensor& mask);

// ceil(0.0075 * diagonal)
int default_tolerance(int height, int width);

// Boundary F-measure: a boundary pixel matches when the other mask's boundary
// lies within Euclidean distance `tol_radius`.
double f_measure(const Tensor& pred, const Tensor& gt, int tol_radius);

struct FrameScore {
  std::string sequence_id;
  int frame_index = 0;
  double j = 0.0;
  double f = 0.0;
};

struct MetricStats {
  double mean = 0.0;
  double recall = 0.0;
  double decay = 0.0;
};

enum class Measure { kJ, kF };

// Per-sequence mean / recall / decay averaged over sequences. Frames are
// grouped by sequence_id and ordered by frame_index. Decay compares the means
// of the first and last max(1, n/4) frames. Throws EmptyInput.
MetricStats metric_statistics(const std::vector<FrameScore>& frames, Measure measure,
                              double recall_threshold = 0.5);
MetricStats j_statistics(const std::vector<FrameScore>& frames, double recall_threshold = 0.5);
MetricStats f_statistics(const std::vector<FrameScore>& frames, double recall_threshold = 0.5);

struct SequenceRow {
  std::string sequence_id;
  int frames = 0;
  double j_mean = 0.0;
  double f_mean = 0.0;
};

struct EvalReport {
  std::vector<SequenceRow> sequences;  // sorted by id
  MetricStats j;
  MetricStats f;
  int frames = 0;
  std::string fingerprint;
  double threshold = 0.5;
  int tol_radius = 0;  // 0: per-frame default
  double recall_threshold = 0.5;
};

EvalReport build_report(const std::vector<FrameScore>& frames, double recall_threshold = 0.5);

struct EvalOptions {
  double threshold = 0.5;
  int tol_radius = 0;
  double recall_threshold = 0.5;
  Network::Stream stream = Network::Stream::kSource;
};

FrameScore score_frame(const Tensor& pred, const Tensor& gt, const std::string& sequence_id,
                       int frame_index, int tol_radius);

// Runs the frozen model on every sample. Throws MissingGroundTruth listing
// the frames without labels.
EvalReport evaluate_dataset(const Network& network, const std::vector<FrameSample>& samples,
                            const EvalOptions& options = {});

// Scores binary prediction masks against the samples' labels.
EvalReport evaluate_predictions(const std::vector<Tensor>& predictions,
                                const std::vector<FrameSample>& samples,
                                const EvalOptions& options = {});

// report.json, report.txt and per_sequence.csv inside `dir`.
void write_report(const EvalReport& report, const std::filesystem::path& dir);
std::string report_json(const EvalReport& report);
std::string report_table(const EvalReport& report);
std::string per_sequence_csv(const EvalReport& report);

}  // namespace vosda
