// vosda: dataset generation, training, adaptation, evaluation, flow utilities
// and the ablation harness. Exit codes: 0 ok, 1 usage, 2 data, 3 numeric.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vosda/vosda.h"

namespace {

namespace fs = std::filesystem;

struct Failure {
  vosda_status status;
};

void check(vosda_status s) {
  if (s != VOSDA_OK) throw Failure{s};
}

struct StringDeleter {
  void operator()(char* s) const { vosda_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

template <typename T, void (*Free)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Free(p); }
};
using FlowPtr = std::unique_ptr<vosda_flow, HandleDeleter<vosda_flow, vosda_flow_free>>;
using ConfigPtr = std::unique_ptr<vosda_config, HandleDeleter<vosda_config, vosda_config_free>>;
using ReportPtr = std::unique_ptr<vosda_report, HandleDeleter<vosda_report, vosda_report_free>>;

void print_line(const char* line, void* quiet) {
  if (!*static_cast<bool*>(quiet)) std::fprintf(stderr, "%s\n", line);
}

std::string absolute(const std::string& p) { return p.empty() ? p : fs::absolute(p).string(); }

// Flags shared by train, adapt and ablate. Flag values win over the file.
struct RunFlags {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> sets;
  std::optional<std::string> fusion, flow_supervision, seed, epochs, max_steps, source, target;
  bool quiet = false;

  void add_to(CLI::App* cmd, bool model_flags) {
    cmd->add_option("-c,--config", config_path, "Config file (key = value)")->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", out_dir, "Run directory")->required();
    cmd->add_option("--set", sets, "Override a config key, key=value (repeatable)");
    if (model_flags) {
      cmd->add_option("--fusion", fusion, "conv, product, addition or none");
      cmd->add_option("--flow-supervision", flow_supervision, "true or false");
    }
    cmd->add_option("--seed", seed, "Random seed");
    cmd->add_option("--epochs", epochs, "Training epochs");
    cmd->add_option("--max-steps", max_steps, "Step budget, 0 for none");
    cmd->add_option("--source", source, "Source dataset root");
    cmd->add_option("--target", target, "Target dataset root");
    cmd->add_flag("-q,--quiet", quiet, "No progress output");
  }

  ConfigPtr build() const {
    vosda_config* raw = nullptr;
    check(config_path.empty() ? vosda_config_new(&raw) : vosda_config_load(config_path.c_str(), &raw));
    ConfigPtr config(raw);
    auto set = [&](const char* key, const std::string& value) {
      check(vosda_config_set(config.get(), key, value.c_str()));
    };
    if (fusion) set("fusion", *fusion);
    if (flow_supervision) set("flow_supervision", *flow_supervision);
    if (seed) set("seed", *seed);
    if (epochs) set("epochs", *epochs);
    if (max_steps) set("max_steps", *max_steps);
    if (source) set("source", absolute(*source));
    if (target) set("target", absolute(*target));
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
      }
      set(kv.substr(0, eq).c_str(), kv.substr(eq + 1));
    }
    return config;
  }
};

int run_train(RunFlags& flags, const std::string& regime, const std::string& source_ckpt,
              const std::string& resume, bool verify) {
  ConfigPtr config = flags.build();
  check(vosda_config_set(config.get(), "regime", regime.c_str()));
  const std::string src = absolute(source_ckpt);
  const std::string res = absolute(resume);
  vosda_run_options opts{};
  opts.out_dir = flags.out_dir.c_str();
  opts.source_ckpt = src.empty() ? nullptr : src.c_str();
  opts.resume_ckpt = res.empty() ? nullptr : res.c_str();
  opts.verify_isolation = verify ? 1 : 0;
  opts.log = print_line;
  opts.log_user = &flags.quiet;
  check(vosda_run(config.get(), &opts));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video object segmentation with domain adaptation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", vosda_version());

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset as a DAVIS tree");
  std::string gen_spec, gen_out;
  bool gen_force = false;
  gen->add_option("-s,--spec", gen_spec, "Dataset spec file")->required()->check(CLI::ExistingFile);
  gen->add_option("-o,--out", gen_out, "Output directory")->required();
  gen->add_flag("-f,--force", gen_force, "Write into a non-empty directory");

  // train
  auto* train = app.add_subcommand("train", "Supervised training on the source domain");
  RunFlags train_flags;
  std::string train_resume;
  train_flags.add_to(train, true);
  train->add_option("--resume", train_resume, "Continue from a checkpoint")->check(CLI::ExistingFile);

  // adapt
  auto* adapt = app.add_subcommand("adapt", "Unsupervised domain adaptation");
  RunFlags adapt_flags;
  std::string adapt_regime, adapt_source_ckpt, adapt_resume;
  bool adapt_verify = false;
  adapt_flags.add_to(adapt, true);
  adapt->add_option("--regime", adapt_regime, "shared or separated")
      ->required()
      ->check(CLI::IsMember({"shared", "separated"}));
  adapt->add_option("--source-ckpt", adapt_source_ckpt, "Frozen source model (separated regime)")
      ->check(CLI::ExistingFile);
  adapt->add_option("--resume", adapt_resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  adapt->add_flag("--verify-isolation", adapt_verify, "Checksum frozen modules every sub-step");

  // eval
  auto* eval = app.add_subcommand("eval", "Score a checkpoint or prediction masks");
  std::string ev_ckpt, ev_pred, ev_data, ev_split = "test", ev_out, ev_stream = "auto";
  vosda_eval_options ev_opts{0.5, 0, 0.5, 0};
  auto* ev_ckpt_opt = eval->add_option("--ckpt", ev_ckpt, "Checkpoint")->check(CLI::ExistingFile);
  auto* ev_pred_opt =
      eval->add_option("--predictions", ev_pred, "Mask tree <dir>/<seq>/%05d.png")->check(CLI::ExistingDirectory);
  ev_ckpt_opt->excludes(ev_pred_opt);
  eval->add_option("-d,--data", ev_data, "Dataset root")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--split", ev_split, "train or test")->check(CLI::IsMember({"train", "test"}));
  eval->add_option("-o,--out", ev_out, "Report directory");
  eval->add_option("--threshold", ev_opts.threshold, "Mask threshold")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--tol", ev_opts.tol_radius, "Boundary tolerance in pixels, 0 for default")
      ->check(CLI::NonNegativeNumber);
  eval->add_option("--recall-threshold", ev_opts.recall_threshold, "Recall threshold");
  eval->add_option("--stream", ev_stream, "Encoder: auto, source or target")
      ->check(CLI::IsMember({"auto", "source", "target"}));

  // flow
  auto* flow = app.add_subcommand("flow", "Inspect and edit .flo files");
  flow->require_subcommand(1);
  auto* flow_info = flow->add_subcommand("info", "Dimensions and magnitude statistics");
  std::string fi_path;
  flow_info->add_option("file", fi_path, ".flo file")->required();
  auto* flow_convert = flow->add_subcommand("convert", "Crop and/or resize");
  std::string fc_in, fc_out;
  std::vector<int> fc_crop, fc_resize;
  flow_convert->add_option("input", fc_in, "Input .flo")->required();
  flow_convert->add_option("output", fc_out, "Output .flo")->required();
  flow_convert->add_option("--crop", fc_crop, "y0 x0 height width")->expected(4)->delimiter(',');
  flow_convert->add_option("--resize", fc_resize, "height width")->expected(2)->delimiter(',');
  auto* flow_vis = flow->add_subcommand("visualize", "Colour-wheel PNG");
  std::string fv_in, fv_out;
  double fv_max = 0.0;
  flow_vis->add_option("input", fv_in, "Input .flo")->required();
  flow_vis->add_option("output", fv_out, "Output .png")->required();
  flow_vis->add_option("--max-mag", fv_max, "Saturation magnitude, 0 for the field maximum")
      ->check(CLI::NonNegativeNumber);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Fusion and flow-supervision grid");
  RunFlags ab_flags;
  int ab_jobs = 1;
  ab_flags.add_to(ablate, false);
  ablate->add_option("-j,--jobs", ab_jobs, "Rows run concurrently")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      char* hash = nullptr;
      check(vosda_generate(gen_spec.c_str(), gen_out.c_str(), gen_force ? 1 : 0, &hash));
      OwnedString owned(hash);
      std::printf("%s\n", hash);
    } else if (*train) {
      return run_train(train_flags, "supervised", "", train_resume, false);
    } else if (*adapt) {
      if (adapt_regime == "separated" && adapt_source_ckpt.empty()) {
        std::fprintf(stderr, "error: adapt --regime separated needs --source-ckpt\n");
        return 1;
      }
      const char* regime = adapt_regime == "shared" ? "uda_shared" : "uda_separated";
      return run_train(adapt_flags, regime, adapt_source_ckpt, adapt_resume, adapt_verify);
    } else if (*eval) {
      if (ev_ckpt.empty() == ev_pred.empty()) {
        std::fprintf(stderr, "error: eval needs exactly one of --ckpt or --predictions\n");
        return 1;
      }
      ev_opts.stream = ev_stream == "source" ? 1 : ev_stream == "target" ? 2 : 0;
      vosda_report* raw = nullptr;
      if (!ev_ckpt.empty()) {
        check(vosda_evaluate_checkpoint(ev_ckpt.c_str(), ev_data.c_str(), ev_split.c_str(), &ev_opts, &raw));
      } else {
        check(vosda_evaluate_masks(ev_pred.c_str(), ev_data.c_str(), ev_split.c_str(), &ev_opts, &raw));
      }
      ReportPtr report(raw);
      if (!ev_out.empty()) check(vosda_report_write(report.get(), ev_out.c_str()));
      char* table = nullptr;
      check(vosda_report_table(report.get(), &table));
      OwnedString owned(table);
      std::fputs(table, stdout);
    } else if (*flow_info) {
      vosda_flow* raw = nullptr;
      check(vosda_flow_read(fi_path.c_str(), &raw));
      FlowPtr f(raw);
      char* text = nullptr;
      check(vosda_flow_info(f.get(), &text));
      OwnedString owned(text);
      std::printf("%s\n", text);
    } else if (*flow_convert) {
      vosda_flow* raw = nullptr;
      check(vosda_flow_read(fc_in.c_str(), &raw));
      FlowPtr f(raw);
      if (!fc_crop.empty()) {
        check(vosda_flow_crop(f.get(), fc_crop[0], fc_crop[1], fc_crop[2], fc_crop[3], &raw));
        f.reset(raw);
      }
      if (!fc_resize.empty()) {
        check(vosda_flow_resize(f.get(), fc_resize[0], fc_resize[1], &raw));
        f.reset(raw);
      }
      check(vosda_flow_write(f.get(), fc_out.c_str()));
    } else if (*flow_vis) {
      vosda_flow* raw = nullptr;
      check(vosda_flow_read(fv_in.c_str(), &raw));
      FlowPtr f(raw);
      check(vosda_flow_visualize(f.get(), fv_max, fv_out.c_str()));
    } else if (*ablate) {
      ConfigPtr config = ab_flags.build();
      char* table = nullptr;
      const vosda_status s = vosda_ablate(config.get(), ab_flags.out_dir.c_str(), ab_jobs, print_line,
                                          &ab_flags.quiet, &table);
      if (table) {
        OwnedString owned(table);
        std::fputs(table, stdout);
      }
      check(s);
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", vosda_last_error());
    return vosda_exit_code(f.status);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
