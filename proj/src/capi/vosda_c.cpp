#include "vosda/vosda.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vosda/checkpoint.hpp"
#include "vosda/config.hpp"
#include "vosda/davis.hpp"
#include "vosda/error.hpp"
#include "vosda/flo.hpp"
#include "vosda/flow_tools.hpp"
#include "vosda/metrics.hpp"
#include "vosda/synthetic.hpp"
#include "vosda/training.hpp"

struct vosda_flow {
  vosda::FlowField field;
};

struct vosda_config {
  vosda::TrainConfig config;
};

struct vosda_report {
  vosda::EvalReport report;
};

namespace {

using vosda::Error;
using vosda::ErrorCode;
namespace fs = std::filesystem;

static_assert(static_cast<int>(ErrorCode::kIsolationViolation) == VOSDA_ERR_ISOLATION_VIOLATION,
              "status codes mirror vosda::ErrorCode");

thread_local std::string g_last_error;

template <typename F>
vosda_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return VOSDA_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<vosda_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = std::string("internal error: ") + e.what();
  } catch (...) {
    g_last_error = "internal error";
  }
  return VOSDA_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kUsage, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

std::string version_string() { return std::string(VOSDA_VERSION) + " (" + VOSDA_GIT_DESCRIBE + ")"; }

// Dataset paths in a config file are relative to the file.
void resolve_paths(vosda::TrainConfig& config, const fs::path& base) {
  for (std::string* p : {&config.source, &config.target, &config.warm_start}) {
    if (!p->empty() && fs::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
}

class Logger {
 public:
  Logger(vosda_log_fn fn, void* user, std::string prefix = {})
      : fn_(fn), user_(user), prefix_(std::move(prefix)) {}

  void operator()(const std::string& line) const {
    if (!fn_) return;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    fn_((prefix_ + line).c_str(), user_);
  }

 private:
  vosda_log_fn fn_;
  void* user_;
  std::string prefix_;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

vosda::EvalReport run_training(const vosda::TrainConfig& config, const fs::path& out_dir,
                               const char* source_ckpt, const char* resume_ckpt,
                               bool verify_isolation, const Logger& log) {
  config.validate();
  if (config.regime == vosda::Regime::kUdaSeparated && (!source_ckpt || !*source_ckpt)) {
    throw Error(ErrorCode::kUsage, "the separated regime needs a source checkpoint");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
  write_text(out_dir / "config.txt", config.to_text());
  write_text(out_dir / "seed.txt", std::to_string(config.seed) + "\n");
  write_text(out_dir / "version.txt", version_string() + "\n");

  const vosda::TrainData data = vosda::load_train_data(config);
  log("source " + std::to_string(data.source_train.size()) + " train / " +
      std::to_string(data.source_val.size()) + " val samples, target " +
      std::to_string(data.target_train.size()) + " train samples");

  const vosda::ModelConfig model = config.model_config();
  std::optional<vosda::Checkpoint> resume;
  if (resume_ckpt && *resume_ckpt) resume = vosda::load_checkpoint(resume_ckpt, &model);

  vosda::TrainOptions options;
  options.checkpoint_dir = out_dir;
  options.verify_isolation = verify_isolation;
  options.resume = resume ? &*resume : nullptr;
  options.on_epoch = [&](const vosda::EpochRecord& r, const vosda::Network&) {
    std::string line = "epoch " + std::to_string(r.epoch);
    if (r.val_j >= 0) line += fmt(" val_j=%.4f", r.val_j);
    if (r.heldout_disc_acc >= 0) line += fmt(" disc_acc=%.4f", r.heldout_disc_acc);
    log(line);
  };

  vosda::TrainResult result = [&] {
    switch (config.regime) {
      case vosda::Regime::kSupervised:
        return vosda::train_supervised(config, data, options);
      case vosda::Regime::kUdaShared:
        return vosda::train_uda_shared(config, data, options);
      case vosda::Regime::kUdaSeparated: {
        const vosda::Checkpoint source = vosda::load_checkpoint(source_ckpt, &model);
        return vosda::train_uda_separated(config, source.network, data, options);
      }
    }
    throw Error(ErrorCode::kUsage, "unknown regime");
  }();

  write_text(out_dir / "history.csv", result.history.to_csv());
  write_text(out_dir / "epochs.csv", result.history.epochs_csv());
  vosda::save_checkpoint(result.network, config, result.state, out_dir / "model.ckpt");

  vosda::EvalOptions eval;
  eval.threshold = config.threshold;
  eval.tol_radius = config.tol_radius;
  vosda::EvalReport report = vosda::evaluate_dataset(result.network, data.source_val, eval);
  report.fingerprint = model.fingerprint();
  vosda::write_report(report, out_dir / "report");
  log(fmt("done, source val J mean %.4f", report.j.mean) + fmt(" F mean %.4f", report.f.mean));
  return report;
}

vosda::EvalOptions eval_options(const vosda_eval_options* o) {
  vosda::EvalOptions out;
  if (!o) return out;
  if (o->threshold != 0.0) out.threshold = o->threshold;
  if (o->recall_threshold != 0.0) out.recall_threshold = o->recall_threshold;
  require(o->tol_radius >= 0, "tolerance radius must be >= 0");
  out.tol_radius = o->tol_radius;
  require(o->stream >= 0 && o->stream <= 2, "stream must be 0 (auto), 1 (source) or 2 (target)");
  if (!(out.threshold > 0.0 && out.threshold < 1.0)) {
    throw Error(ErrorCode::kUsage, "threshold must lie in (0, 1)");
  }
  return out;
}

std::vector<vosda::FrameSample> labeled_samples(const char* dataset_root, const char* split) {
  require(dataset_root && *dataset_root, "dataset root required");
  const vosda::Split s = vosda::parse_split(split && *split ? split : "test");
  const auto handle = vosda::load_davis_layout(dataset_root, s, true);
  return vosda::load_samples(handle, true, vosda::Domain::kSource);
}

struct AblationRow {
  const char* name;
  const char* dir;
  vosda::FusionMode fusion;
  bool flow_supervision;
};

const AblationRow kAblationRows[] = {
    {"Baseline", "baseline", vosda::FusionMode::kNone, false},
    {"FB+PF", "fb_pf", vosda::FusionMode::kProduct, false},
    {"FB+AF", "fb_af", vosda::FusionMode::kAddition, false},
    {"FB+CF", "fb_cf", vosda::FusionMode::kConv, false},
    {"FB+PF+FS", "fb_pf_fs", vosda::FusionMode::kProduct, true},
    {"FB+AF+FS", "fb_af_fs", vosda::FusionMode::kAddition, true},
    {"FB+CF+FS", "fb_cf_fs", vosda::FusionMode::kConv, true},
};

struct AblationResult {
  bool ok = false;
  double j = 0.0;
  double f = 0.0;
  std::string error;
  vosda_status status = VOSDA_OK;
};

}  // namespace

extern "C" {

VOSDA_API int vosda_exit_code(vosda_status status) {
  switch (status) {
    case VOSDA_OK:
      return 0;
    case VOSDA_ERR_USAGE:
    case VOSDA_ERR_CONFIG:
      return 1;
    case VOSDA_ERR_NON_FINITE_GRADIENT:
    case VOSDA_ERR_NON_FINITE_VALUE:
    case VOSDA_ERR_ISOLATION_VIOLATION:
      return 3;
    default:
      return 2;
  }
}

VOSDA_API const char* vosda_status_name(vosda_status status) {
  if (status == VOSDA_OK) return "Ok";
  if (status == VOSDA_ERR_INTERNAL) return "Internal";
  if (status >= VOSDA_ERR_USAGE && status <= VOSDA_ERR_ISOLATION_VIOLATION) {
    return vosda::error_code_name(static_cast<ErrorCode>(status));
  }
  return "Unknown";
}

VOSDA_API const char* vosda_last_error(void) { return g_last_error.c_str(); }

VOSDA_API const char* vosda_version(void) {
  static const std::string v = version_string();
  return v.c_str();
}

VOSDA_API void vosda_string_free(char* s) { std::free(s); }

VOSDA_API vosda_status vosda_flow_read(const char* path, vosda_flow** out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    *out = new vosda_flow{vosda::read_flo(path)};
  });
}

VOSDA_API vosda_status vosda_flow_write(const vosda_flow* flow, const char* path) {
  return guarded([&] {
    require(flow && path, "flow and path are required");
    vosda::write_flo(flow->field, path);
  });
}

VOSDA_API void vosda_flow_free(vosda_flow* flow) { delete flow; }

VOSDA_API vosda_status vosda_flow_size(const vosda_flow* flow, int* height, int* width) {
  return guarded([&] {
    require(flow && height && width, "flow, height and width are required");
    *height = flow->field.height;
    *width = flow->field.width;
  });
}

VOSDA_API vosda_status vosda_flow_info(const vosda_flow* flow, char** text) {
  return guarded([&] {
    require(flow && text, "flow and text are required");
    *text = dup_string(vosda::flow_info(flow->field));
  });
}

VOSDA_API vosda_status vosda_flow_crop(const vosda_flow* flow, int y0, int x0, int height,
                                       int width, vosda_flow** out) {
  return guarded([&] {
    require(flow && out, "flow and out are required");
    *out = new vosda_flow{vosda::crop_flow(flow->field, y0, x0, height, width)};
  });
}

VOSDA_API vosda_status vosda_flow_resize(const vosda_flow* flow, int height, int width,
                                         vosda_flow** out) {
  return guarded([&] {
    require(flow && out, "flow and out are required");
    require(height > 0 && width > 0, "target size must be positive");
    *out = new vosda_flow{vosda::resize_flow(flow->field, height, width)};
  });
}

VOSDA_API vosda_status vosda_flow_visualize(const vosda_flow* flow, double max_magnitude,
                                            const char* png_path) {
  return guarded([&] {
    require(flow && png_path, "flow and path are required");
    require(max_magnitude >= 0.0, "max magnitude must be >= 0");
    vosda::write_rgb_image(vosda::flow_to_color(flow->field, max_magnitude), png_path);
  });
}

VOSDA_API vosda_status vosda_config_new(vosda_config** out) {
  return guarded([&] {
    require(out, "out is required");
    *out = new vosda_config{};
  });
}

VOSDA_API vosda_status vosda_config_load(const char* path, vosda_config** out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    auto config = vosda::TrainConfig::from_key_values(vosda::KeyValueFile::load(path));
    resolve_paths(config, fs::absolute(path).parent_path());
    *out = new vosda_config{std::move(config)};
  });
}

VOSDA_API vosda_status vosda_config_parse(const char* text, vosda_config** out) {
  return guarded([&] {
    require(text && out, "text and out are required");
    *out = new vosda_config{vosda::TrainConfig::from_key_values(vosda::KeyValueFile::parse(text))};
  });
}

VOSDA_API void vosda_config_free(vosda_config* config) { delete config; }

VOSDA_API vosda_status vosda_config_set(vosda_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "config, key and value are required");
    config->config.set(key, value);
  });
}

VOSDA_API vosda_status vosda_config_get(const vosda_config* config, const char* key, char** value) {
  return guarded([&] {
    require(config && key && value, "config, key and value are required");
    *value = dup_string(config->config.get(key));
  });
}

VOSDA_API vosda_status vosda_config_to_text(const vosda_config* config, char** text) {
  return guarded([&] {
    require(config && text, "config and text are required");
    *text = dup_string(config->config.to_text());
  });
}

VOSDA_API vosda_status vosda_generate(const char* spec_path, const char* out_dir, int force,
                                      char** manifest_hash) {
  return guarded([&] {
    require(spec_path && out_dir, "spec path and output directory are required");
    const auto spec = vosda::synthetic_spec_from_key_values(vosda::KeyValueFile::load(spec_path));
    spec.validate();
    const auto data = vosda::generate_synthetic_dataset(spec);
    const std::string hash = vosda::materialize_dataset(spec, data, out_dir, force != 0);
    if (manifest_hash) *manifest_hash = dup_string(hash);
  });
}

VOSDA_API vosda_status vosda_run(const vosda_config* config, const vosda_run_options* options) {
  return guarded([&] {
    require(config && options && options->out_dir && *options->out_dir,
            "config and an output directory are required");
    run_training(config->config, options->out_dir, options->source_ckpt, options->resume_ckpt,
                 options->verify_isolation != 0, Logger(options->log, options->log_user));
  });
}

VOSDA_API vosda_status vosda_evaluate_checkpoint(const char* ckpt_path, const char* dataset_root,
                                                 const char* split,
                                                 const vosda_eval_options* options,
                                                 vosda_report** out) {
  return guarded([&] {
    require(ckpt_path && out, "checkpoint and out are required");
    vosda::EvalOptions eval = eval_options(options);
    const vosda::Checkpoint ckpt = vosda::load_checkpoint(ckpt_path);
    const int stream = options ? options->stream : 0;
    const bool has_target = ckpt.network.en_t.has_value();
    if (stream == 2 && !has_target) {
      throw Error(ErrorCode::kUsage, "checkpoint has no target encoder");
    }
    eval.stream = (stream == 2 || (stream == 0 && has_target)) ? vosda::Network::Stream::kTarget
                                                                : vosda::Network::Stream::kSource;
    const auto samples = labeled_samples(dataset_root, split);
    auto report = vosda::evaluate_dataset(ckpt.network, samples, eval);
    report.fingerprint = ckpt.network.config().fingerprint();
    *out = new vosda_report{std::move(report)};
  });
}

VOSDA_API vosda_status vosda_evaluate_masks(const char* pred_root, const char* dataset_root,
                                            const char* split, const vosda_eval_options* options,
                                            vosda_report** out) {
  return guarded([&] {
    require(pred_root && out, "prediction root and out are required");
    const vosda::EvalOptions eval = eval_options(options);
    const auto samples = labeled_samples(dataset_root, split);
    std::vector<vosda::Tensor> preds;
    preds.reserve(samples.size());
    for (const auto& s : samples) {
      char name[32];
      std::snprintf(name, sizeof name, "%05d.png", s.frame_index);
      const fs::path p = fs::path(pred_root) / s.sequence_id / name;
      if (!fs::exists(p)) throw Error(ErrorCode::kCountMismatch, "no prediction " + p.string());
      preds.push_back(vosda::read_mask_png(p));
    }
    *out = new vosda_report{vosda::evaluate_predictions(preds, samples, eval)};
  });
}

VOSDA_API void vosda_report_free(vosda_report* report) { delete report; }

VOSDA_API vosda_status vosda_report_write(const vosda_report* report, const char* dir) {
  return guarded([&] {
    require(report && dir, "report and directory are required");
    vosda::write_report(report->report, dir);
  });
}

VOSDA_API vosda_status vosda_report_json(const vosda_report* report, char** json) {
  return guarded([&] {
    require(report && json, "report and json are required");
    *json = dup_string(vosda::report_json(report->report));
  });
}

VOSDA_API vosda_status vosda_report_table(const vosda_report* report, char** table) {
  return guarded([&] {
    require(report && table, "report and table are required");
    *table = dup_string(vosda::report_table(report->report));
  });
}

VOSDA_API vosda_status vosda_report_stats(const vosda_report* report, double stats[6]) {
  return guarded([&] {
    require(report && stats, "report and stats are required");
    const auto& r = report->report;
    const double v[6] = {r.j.mean, r.j.recall, r.j.decay, r.f.mean, r.f.recall, r.f.decay};
    std::copy(v, v + 6, stats);
  });
}

VOSDA_API vosda_status vosda_ablate(const vosda_config* config, const char* out_dir, int jobs,
                                    vosda_log_fn log, void* log_user, char** table) {
  constexpr std::size_t kRows = std::size(kAblationRows);
  std::vector<AblationResult> results(kRows);
  const vosda_status setup = guarded([&] {
    require(config && out_dir && *out_dir, "config and output directory are required");
    require(jobs >= 1, "jobs must be >= 1");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + std::string(out_dir));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < kRows; i = next++) {
        const AblationRow& row = kAblationRows[i];
        AblationResult& res = results[i];
        try {
          vosda::TrainConfig c = config->config;
          c.regime = vosda::Regime::kSupervised;
          c.model.fusion = row.fusion;
          c.flow_supervision = row.flow_supervision;
          const Logger row_log(log, log_user, std::string("[") + row.name + "] ");
          row_log("start");
          const auto report = run_training(c, fs::path(out_dir) / row.dir, nullptr, nullptr, false,
                                           row_log);
          res.ok = true;
          res.j = report.j.mean;
          res.f = report.f.mean;
        } catch (const std::exception& e) {
          res.error = e.what();
          const auto* err = dynamic_cast<const Error*>(&e);
          res.status = err ? static_cast<vosda_status>(err->code()) : VOSDA_ERR_INTERNAL;
          Logger(log, log_user, std::string("[") + row.name + "] ")("FAILED: " + res.error);
        }
      }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(jobs, static_cast<int>(kRows));
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::ostringstream csv, txt;
    csv << "row,fusion,flow_supervision,j_mean,f_mean,status\n";
    txt << "Row         J mean   F mean\n";
    char buf[160];
    for (std::size_t i = 0; i < kRows; ++i) {
      const AblationRow& row = kAblationRows[i];
      const AblationResult& res = results[i];
      csv << row.name << ',' << vosda::fusion_mode_name(row.fusion) << ','
          << (row.flow_supervision ? "true" : "false") << ',';
      if (res.ok) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,ok\n", res.j, res.f);
        csv << buf;
        std::snprintf(buf, sizeof buf, "%-10s  %6.4f   %6.4f\n", row.name, res.j, res.f);
      } else {
        csv << ",,failed\n";
        std::snprintf(buf, sizeof buf, "%-10s  FAILED\n", row.name);
      }
      txt << buf;
    }
    write_text(fs::path(out_dir) / "ablation.csv", csv.str());
    write_text(fs::path(out_dir) / "ablation.txt", txt.str());
    if (table) *table = dup_string(txt.str());
  });
  if (setup != VOSDA_OK) return setup;
  for (std::size_t i = 0; i < kRows; ++i) {
    if (!results[i].ok) {
      g_last_error = std::string(kAblationRows[i].name) + ": " + results[i].error;
      return results[i].status;
    }
  }
  return VOSDA_OK;
}

}  // extern "C"
