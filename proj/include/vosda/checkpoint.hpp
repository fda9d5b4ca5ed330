#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "vosda/config.hpp"
#include "vosda/model.hpp"
#include "vosda/optimizer.hpp"

namespace vosda {

// Where a run stands: completed epochs, steps taken, optimiser buffers.
struct TrainingState {
  int epoch = 0;  // next epoch to run
  long step = 0;
  std::map<std::string, Sgd> optimizers;
};

struct Checkpoint {
  TrainConfig config;
  Network network;
  TrainingState state;
};

// Container layout (little-endian):
//   8 bytes  "VOSDACK1"
//   u64      header length L
//   L bytes  JSON header: fingerprint, config text, epoch, step and a tensor
//            table of {name, shape, dtype, offset, count}
//   payload  float64 arrays in table order
//   u64      FNV-1a of everything before it
// Tensor names are canonical parameter names; optimiser buffers are stored
// as `opt.<optimizer>.<parameter>`. Written to a temp file and renamed.
void save_checkpoint(const Network& network, const TrainConfig& config, const TrainingState& state,
                     const std::filesystem::path& path);

// Throws MissingCheckpoint, CorruptCheckpoint, and FingerprintMismatch when
// `expected` is given and describes a different architecture.
Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig* expected = nullptr);

}  // namespace vosda
