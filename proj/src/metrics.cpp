#include "vosda/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "vosda/error.hpp"

namespace vosda {

namespace {

void require_plane(const Tensor& t, const char* what) {
  if (t.n() != 1 || t.c() != 1) {
    throw Error(ErrorCode::kShapeError, std::string(what) + " must be [1,1,H,W], got " + t.shape_string());
  }
}

// Felzenszwalb-Huttenlocher lower envelope of parabolas over one line.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  const double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == inf) continue;
    if (f[v[k]] == inf) {
      v[k] = q;
      continue;
    }
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = f[v[k]] == inf ? inf : dq * dq + f[v[k]];
  }
}

// Squared Euclidean distance from every pixel to the nearest nonzero pixel.
std::vector<double> squared_distance(const Tensor& seeds) {
  const int h = seeds.h();
  const int w = seeds.w();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> grid(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) grid[y * w + x] = seeds.at(0, 0, y, x) != 0.0 ? 0.0 : inf;
  const int n = std::max(h, w);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < w; ++x) {
    f.resize(h);
    d.resize(h);
    for (int y = 0; y < h; ++y) f[y] = grid[y * w + x];
    edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) grid[y * w + x] = d[y];
  }
  for (int y = 0; y < h; ++y) {
    f.resize(w);
    d.resize(w);
    for (int x = 0; x < w; ++x) f[x] = grid[y * w + x];
    edt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) grid[y * w + x] = d[x];
  }
  return grid;
}

// Fraction of `from` boundary pixels within `tol` of the `to` boundary.
double matched_fraction(const Tensor& from, const std::vector<double>& dist_to, int tol,
                        int& count) {
  count = 0;
  int hits = 0;
  const double limit = static_cast<double>(tol) * tol;
  for (int y = 0; y < from.h(); ++y) {
    for (int x = 0; x < from.w(); ++x) {
      if (from.at(0, 0, y, x) == 0.0) continue;
      ++count;
      if (dist_to[y * from.w() + x] <= limit) ++hits;
    }
  }
  return count == 0 ? 0.0 : static_cast<double>(hits) / count;
}

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += v[i];
  return s / static_cast<double>(end - begin);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

Tensor binarize(const Tensor& prob, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::kUsage, "threshold must lie in (0, 1)");
  }
  Tensor out = Tensor::like(prob);
  auto src = prob.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > threshold ? 1.0 : 0.0;
  return out;
}

double jaccard(const Tensor& pred, const Tensor& gt) {
  require_same_shape(pred, gt, "jaccard");
  std::size_t inter = 0;
  std::size_t uni = 0;
  auto p = pred.values();
  auto g = gt.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool a = p[i] != 0.0;
    const bool b = g[i] != 0.0;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Tensor boundary(const Tensor& mask) {
  require_plane(mask, "mask");
  const int h = mask.h();
  const int w = mask.w();
  Tensor out = Tensor::like(mask);
  auto fg = [&](int y, int x) {
    return y >= 0 && y < h && x >= 0 && x < w && mask.at(0, 0, y, x) != 0.0;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!fg(y, x)) continue;
      if (!fg(y - 1, x) || !fg(y + 1, x) || !fg(y, x - 1) || !fg(y, x + 1)) out.at(0, 0, y, x) = 1.0;
    }
  }
  return out;
}

int default_tolerance(int height, int width) {
  return static_cast<int>(std::ceil(0.0075 * std::hypot(height, width)));
}

double f_measure(const Tensor& pred, const Tensor& gt, int tol_radius) {
  require_same_shape(pred, gt, "f_measure");
  require_plane(pred, "prediction");
  if (tol_radius < 0) throw Error(ErrorCode::kUsage, "tolerance radius must be >= 0");
  const Tensor bp = boundary(pred);
  const Tensor bg = boundary(gt);
  int np = 0;
  int ng = 0;
  const double precision = matched_fraction(bp, squared_distance(bg), tol_radius, np);
  const double recall = matched_fraction(bg, squared_distance(bp), tol_radius, ng);
  if (np == 0 && ng == 0) return 1.0;
  if (np == 0 || ng == 0) return 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

MetricStats metric_statistics(const std::vector<FrameScore>& frames, Measure measure,
                              double recall_threshold) {
  if (frames.empty()) throw Error(ErrorCode::kEmptyInput, "no frames to summarise");
  std::map<std::string, std::vector<const FrameScore*>> groups;
  for (const auto& f : frames) groups[f.sequence_id].push_back(&f);
  MetricStats total;
  for (auto& [id, seq] : groups) {
    std::stable_sort(seq.begin(), seq.end(), [](const FrameScore* a, const FrameScore* b) {
      return a->frame_index < b->frame_index;
    });
    std::vector<double> s;
    for (const FrameScore* f : seq) s.push_back(measure == Measure::kJ ? f->j : f->f);
    const std::size_t n = s.size();
    const std::size_t q = std::max<std::size_t>(1, n / 4);
    total.mean += mean_of(s, 0, n);
    total.recall += static_cast<double>(std::count_if(s.begin(), s.end(),
                                                      [&](double v) { return v > recall_threshold; })) /
                    static_cast<double>(n);
    total.decay += mean_of(s, 0, q) - mean_of(s, n - q, n);
  }
  const double k = static_cast<double>(groups.size());
  total.mean /= k;
  total.recall /= k;
  total.decay /= k;
  return total;
}

MetricStats j_statistics(const std::vector<FrameScore>& frames, double recall_threshold) {
  return metric_statistics(frames, Measure::kJ, recall_threshold);
}

MetricStats f_statistics(const std::vector<FrameScore>& frames, double recall_threshold) {
  return metric_statistics(frames, Measure::kF, recall_threshold);
}

EvalReport build_report(const std::vector<FrameScore>& frames, double recall_threshold) {
  EvalReport r;
  r.j = j_statistics(frames, recall_threshold);
  r.f = f_statistics(frames, recall_threshold);
  r.frames = static_cast<int>(frames.size());
  r.recall_threshold = recall_threshold;
  std::map<std::string, SequenceRow> rows;
  for (const auto& f : frames) {
    auto& row = rows[f.sequence_id];
    row.sequence_id = f.sequence_id;
    ++row.frames;
    row.j_mean += f.j;
    row.f_mean += f.f;
  }
  for (auto& [id, row] : rows) {
    row.j_mean /= row.frames;
    row.f_mean /= row.frames;
    r.sequences.push_back(row);
  }
  return r;
}

FrameScore score_frame(const Tensor& pred, const Tensor& gt, const std::string& sequence_id,
                       int frame_index, int tol_radius) {
  FrameScore s;
  s.sequence_id = sequence_id;
  s.frame_index = frame_index;
  s.j = jaccard(pred, gt);
  s.f = f_measure(pred, gt, tol_radius > 0 ? tol_radius : default_tolerance(gt.h(), gt.w()));
  return s;
}

namespace {

void require_labels(const std::vector<FrameSample>& samples) {
  std::string missing;
  int count = 0;
  for (const auto& s : samples) {
    if (s.has_mask()) continue;
    if (count < 10) missing += (count ? ", " : "") + s.sequence_id + "/" + std::to_string(s.frame_index);
    ++count;
  }
  if (count > 0) {
    throw Error(ErrorCode::kMissingGroundTruth,
                std::to_string(count) + " frame(s) without ground truth: " + missing +
                    (count > 10 ? ", ..." : ""));
  }
  if (samples.empty()) throw Error(ErrorCode::kEmptyInput, "no frames to evaluate");
}

}  // namespace

EvalReport evaluate_dataset(const Network& network, const std::vector<FrameSample>& samples,
                            const EvalOptions& options) {
  require_labels(samples);
  std::vector<FrameScore> scores;
  scores.reserve(samples.size());
  for (const auto& s : samples) {
    const Tensor prob = network.predict(s.image, s.flow, options.stream);
    scores.push_back(score_frame(binarize(prob, options.threshold), s.mask(), s.sequence_id,
                                 s.frame_index, options.tol_radius));
  }
  EvalReport r = build_report(scores, options.recall_threshold);
  r.fingerprint = network.config().fingerprint();
  r.threshold = options.threshold;
  r.tol_radius = options.tol_radius;
  return r;
}

EvalReport evaluate_predictions(const std::vector<Tensor>& predictions,
                                const std::vector<FrameSample>& samples,
                                const EvalOptions& options) {
  require_labels(samples);
  if (predictions.size() != samples.size()) {
    throw Error(ErrorCode::kCountMismatch, std::to_string(predictions.size()) + " predictions for " +
                                               std::to_string(samples.size()) + " frames");
  }
  std::vector<FrameScore> scores;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    scores.push_back(score_frame(predictions[i], samples[i].mask(), samples[i].sequence_id,
                                 samples[i].frame_index, options.tol_radius));
  }
  EvalReport r = build_report(scores, options.recall_threshold);
  r.fingerprint = "predictions";
  r.threshold = options.threshold;
  r.tol_radius = options.tol_radius;
  return r;
}

std::string report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  auto stats = [](const MetricStats& s) {
    return nlohmann::ordered_json{{"mean", s.mean}, {"recall", s.recall}, {"decay", s.decay}};
  };
  j["J"] = stats(r.j);
  j["F"] = stats(r.f);
  j["frames"] = r.frames;
  j["sequences_evaluated"] = r.sequences.size();
  j["fingerprint"] = r.fingerprint;
  j["threshold"] = r.threshold;
  j["tol_radius"] = r.tol_radius;
  j["recall_threshold"] = r.recall_threshold;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& s : r.sequences)
    rows.push_back({{"sequence", s.sequence_id}, {"frames", s.frames}, {"J_mean", s.j_mean},
                    {"F_mean", s.f_mean}});
  j["sequences"] = rows;
  return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& r) {
  std::ostringstream os;
  os << "Measure  Mean      Recall    Decay\n";
  os << "J        " << fmt(r.j.mean) << "  " << fmt(r.j.recall) << "  " << fmt(r.j.decay) << "\n";
  os << "F        " << fmt(r.f.mean) << "  " << fmt(r.f.recall) << "  " << fmt(r.f.decay) << "\n";
  os << "\n" << r.frames << " frames, " << r.sequences.size() << " sequences\n\n";
  os << "Sequence                        J mean    F mean\n";
  for (const auto& s : r.sequences) {
    char line[128];
    std::snprintf(line, sizeof line, "%-30s  %s  %s\n", s.sequence_id.c_str(), fmt(s.j_mean).c_str(),
                  fmt(s.f_mean).c_str());
    os << line;
  }
  return os.str();
}

std::string per_sequence_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "sequence,frames,j_mean,f_mean\n";
  for (const auto& s : r.sequences)
    os << s.sequence_id << ',' << s.frames << ',' << fmt(s.j_mean) << ',' << fmt(s.f_mean) << '\n';
  return os.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + (dir / name).string());
    out << text;
  };
  put("report.json", report_json(report));
  put("report.txt", report_table(report));
  put("per_sequence.csv", per_sequence_csv(report));
}

}  // namespace vosda
