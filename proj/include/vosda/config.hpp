#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vosda/losses.hpp"
#include "vosda/model.hpp"
#include "vosda/synthetic.hpp"

namespace vosda {

// Flat `key = value` text with `#` comments. Keys are unique.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

enum class Regime { kSupervised, kUdaShared, kUdaSeparated };

const char* regime_name(Regime regime);
Regime parse_regime(const std::string& text);

// Every knob of a run. Defaults are the published training settings; the
// desk-scale lab configs override sizes and budgets.
struct TrainConfig {
  Regime regime = Regime::kSupervised;

  // Supervised / shared-regime optimisation.
  int epochs = 100;
  int max_steps = 0;  // 0: run every epoch to completion
  int batch_size = 8;
  double lr = 0.004;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double lr_decay = 0.97;
  double disc_lr = 0.004;  // shared regime discriminator
  double disc_momentum = 0.0;

  // Weights-separated adaptation.
  int uda_epochs = 20;
  double uda_lr = 1e-4;
  double uda_momentum = 0.9;
  double uda_disc_lr = 0.0;  // 0: same as uda_lr
  int m_iters = 5;  // En_T iterations per step
  int n_iters = 5;  // D iterations per step

  LossWeights loss;
  bool flow_supervision = true;

  // Data and model.
  int crop = 384;
  bool augment_flip = true;
  bool augment_jitter = true;
  ModelConfig model;    // flow_scale inside is ignored, see below
  double flow_scale = 0.0;  // 0: crop / 20
  std::uint64_t seed = 0;
  bool deterministic = true;

  std::string source;  // DAVIS-layout roots
  std::string target;
  std::string source_val_split = "test";
  std::string target_val_split = "test";
  std::string warm_start;  // shared regime: start from this checkpoint
  int val_every = 1;       // epochs between validation passes, 0 = never

  double threshold = 0.5;
  int tol_radius = 0;  // 0: ceil(0.0075 * image diagonal)

  void validate() const;
  // `model` with the flow scale resolved.
  ModelConfig model_config() const;

  static TrainConfig from_key_values(const KeyValueFile& kv);
  static TrainConfig from_key_values(const KeyValueFile& kv, const TrainConfig& base);
  // Overrides a single key; throws ConfigError with the key path on bad input.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  // Resolved snapshot, one `key = value` per line in a fixed order.
  std::string to_text() const;
  static const std::vector<std::string>& keys();
};

SyntheticDatasetSpec synthetic_spec_from_key_values(const KeyValueFile& kv);
std::string synthetic_spec_to_text(const SyntheticDatasetSpec& spec);

}  // namespace vosda
