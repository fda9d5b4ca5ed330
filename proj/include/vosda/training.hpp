#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "vosda/checkpoint.hpp"
#include "vosda/config.hpp"
#include "vosda/model.hpp"
#include "vosda/sample.hpp"

namespace vosda {

struct TrainData {
  std::vector<FrameSample> source_train;
  std::vector<FrameSample> source_val;
  std::vector<FrameSample> target_train;  // labels withheld
  std::vector<FrameSample> target_val;    // labels withheld
};

// Reads the DAVIS trees named by the config. Target annotation files are
// never opened.
TrainData load_train_data(const TrainConfig& config);

// Returns copies of the target samples with their labels withheld.
TrainData with_unlabeled_target(TrainData data);

struct StepRecord {
  long step = 0;
  int epoch = 0;
  double l_s = 0.0;
  double l_msk_main = 0.0;
  double l_msk_flow = 0.0;
  double l_ent = 0.0;
  double l_d = 0.0;
  double lambda1 = 0.0;
  double lr = 0.0;
  double disc_acc = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double val_j = -1.0;             // -1: not evaluated
  double heldout_disc_acc = -1.0;  // -1: not evaluated
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;

  // step,epoch,l_s,l_msk_main,l_msk_flow,l_ent,l_d,lambda1,lr,disc_acc
  std::string to_csv() const;
  std::string epochs_csv() const;
};

struct TrainOptions {
  // Writes last.ckpt after every epoch when set.
  std::filesystem::path checkpoint_dir;
  bool keep_epoch_checkpoints = false;
  // Checksums the module that must not move around every sub-step.
  bool verify_isolation = false;
  // Continue a run from an epoch-boundary checkpoint.
  const Checkpoint* resume = nullptr;
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const EpochRecord&, const Network&)> on_epoch;
};

struct TrainResult {
  Network network;
  TrainHistory history;
  TrainingState state;
  double heldout_disc_acc = -1.0;
  long isolation_checks = 0;
};

// Minimises L_S over {En_S, phi, De, De^flow}. Without flow supervision
// De^flow is never touched.
TrainResult train_supervised(const TrainConfig& config, const TrainData& data,
                             const TrainOptions& options = {});

// Per step: (1) L_S on a source batch; (2) lambda1 * L_EnT on a target batch
// through En_S and phi with D fixed; (3) lambda2 * L_D on the latest source
// batch and the target batch with the encoder fixed. One epoch is one pass
// over the target set.
TrainResult train_uda_shared(const TrainConfig& config, const TrainData& data,
                             const TrainOptions& options = {});

// Clones En_S into En_T, then alternates N discriminator and M En_T
// iterations. En_S, phi and De stay fixed.
TrainResult train_uda_separated(const TrainConfig& config, const Network& source,
                                const TrainData& data, const TrainOptions& options = {});

// Accuracy of D on source features from En_S and target features from
// `target_stream`, over whole held-out frames.
double heldout_discriminator_accuracy(const Network& network,
                                      const std::vector<FrameSample>& source,
                                      const std::vector<FrameSample>& target,
                                      Network::Stream target_stream);

}  // namespace vosda
