#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vosda/layers.hpp"
#include "vosda/tensor.hpp"

namespace vosda {

enum class FusionMode {
  kConv,
  kProduct,
  kAddition,
  // Appearance branch only; the ablation baseline without a flow branch.
  kNone,
};

const char* fusion_mode_name(FusionMode mode);
FusionMode parse_fusion_mode(const std::string& text);

struct ModelConfig {
  // One stride-2 stage per entry; both branches share these widths.
  std::vector<int> encoder_widths{16, 32, 64, 96};
  // One conv + upsample stage per entry; must match the encoder depth.
  std::vector<int> decoder_widths{64, 32, 16, 16};
  std::vector<int> discriminator_widths{64, 64, 64};
  FusionMode fusion = FusionMode::kConv;
  // Flow (u, v) is divided by this before encoding.
  double flow_scale = 384.0 / 20.0;

  bool has_flow_branch() const { return fusion != FusionMode::kNone; }
  int stages() const { return static_cast<int>(encoder_widths.size()); }
  int stride() const { return 1 << stages(); }
  int feature_channels() const { return encoder_widths.back(); }
  void validate() const;
  // Hash of every field that changes parameter names, shapes or the forward map.
  std::string fingerprint() const;
};

// One stream of the two-stream encoder: stride-2 3x3 conv + ReLU per stage.
class BranchEncoder {
 public:
  struct Cache {
    std::vector<Conv2d::Cache> convs;
    std::vector<Tensor> activations;
  };

  BranchEncoder() = default;
  BranchEncoder(const std::string& prefix, int in_channels, const std::vector<int>& widths);

  Tensor forward(const Tensor& x, Cache* cache) const;
  void backward(const Tensor& grad_out, Cache& cache);
  void initialize(std::mt19937_64& rng);
  void rename(const std::string& prefix);
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  std::vector<Conv2d> stages_;
};

struct EncodedFeatures {
  Tensor appearance;
  Tensor flow;  // empty when the model has no flow branch
};

// En_S / En_T: appearance branch over RGB, flow branch over padded flow.
class Encoder {
 public:
  struct Cache {
    BranchEncoder::Cache appearance;
    BranchEncoder::Cache flow;
  };

  Encoder() = default;
  Encoder(const std::string& prefix, const ModelConfig& config);

  EncodedFeatures forward(const Tensor& image, const Tensor& flow3, Cache* cache) const;
  // Either gradient may be empty.
  void backward(const Tensor& grad_appearance, const Tensor& grad_flow, Cache& cache);
  void initialize(std::mt19937_64& rng);
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::vector<Parameter*> appearance_parameters() { return appearance_.parameters(); }
  std::vector<Parameter*> flow_parameters() { return flow_.parameters(); }
  const std::string& prefix() const { return prefix_; }
  bool has_flow_branch() const { return has_flow_; }

  friend Encoder init_target_encoder(const Encoder& source);

 private:
  std::string prefix_;
  int stride_ = 1;
  bool has_flow_ = true;
  BranchEncoder appearance_;
  BranchEncoder flow_;
};

// Returns an independent value copy of `source` named as the target encoder.
Encoder init_target_encoder(const Encoder& source);

// The fusion layer phi.
class Fusion {
 public:
  struct Cache {
    Tensor appearance;
    Tensor flow;
    Conv2d::Cache conv;
  };

  Fusion() = default;
  Fusion(const std::string& prefix, FusionMode mode, int channels);

  FusionMode mode() const { return mode_; }
  Tensor forward(const Tensor& appearance, const Tensor& flow, Cache* cache) const;
  // Returns (dL/dX_app, dL/dX_flow).
  std::pair<Tensor, Tensor> backward(const Tensor& grad_out, Cache& cache);
  void initialize(std::mt19937_64& rng);
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  FusionMode mode_ = FusionMode::kConv;
  int channels_ = 0;
  std::optional<Conv2d> conv_;
};

// De / De^flow: (3x3 conv + ReLU + 2x bilinear upsample) per stage, then a 1x1
// conv and the logistic function. No skip connections.
class Decoder {
 public:
  struct Cache {
    std::vector<Conv2d::Cache> convs;
    std::vector<Tensor> activations;
    Conv2d::Cache head;
    Tensor output;
  };

  Decoder() = default;
  Decoder(const std::string& prefix, int in_channels, const std::vector<int>& widths);

  Tensor forward(const Tensor& x, Cache* cache) const;
  Tensor backward(const Tensor& grad_prob, Cache& cache);
  void initialize(std::mt19937_64& rng);
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  std::vector<Conv2d> stages_;
  Conv2d head_;
};

// D: stride-2 3x3 convs + ReLU, global average pooling, 1x1 conv, logistic.
// One probability per sample, shaped [n, 1, 1, 1].
class Discriminator {
 public:
  struct Cache {
    std::vector<Conv2d::Cache> convs;
    std::vector<Tensor> activations;
    int pooled_h = 0;
    int pooled_w = 0;
    Conv2d::Cache head;
    Tensor output;
  };

  Discriminator() = default;
  Discriminator(const std::string& prefix, int in_channels, const std::vector<int>& widths);

  Tensor forward(const Tensor& x, Cache* cache) const;
  Tensor backward(const Tensor& grad_prob, Cache& cache);
  void initialize(std::mt19937_64& rng);
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  std::vector<Conv2d> convs_;
  Conv2d head_;
};

enum class ParamGroup {
  kSourceEncoder,
  kTargetEncoder,
  kFusion,
  kDecoder,
  kFlowDecoder,
  kDiscriminator,
};

const char* param_group_name(ParamGroup group);

// Every trainable collection of the system. Parameter names are canonical
// (`en_s.app.stage1.conv.w`, `disc.conv2.b`, ...) and used by checkpoints.
class Network {
 public:
  Network() = default;
  Network(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  Encoder en_s;
  std::optional<Encoder> en_t;
  Fusion fusion;
  Decoder decoder;
  std::optional<Decoder> flow_decoder;
  Discriminator disc;

  void create_target_encoder() { en_t = init_target_encoder(en_s); }

  std::vector<Parameter*> parameters(ParamGroup group);
  std::vector<const Parameter*> parameters(ParamGroup group) const;
  std::vector<Parameter*> all_parameters();
  std::vector<const Parameter*> all_parameters() const;
  void zero_grad();

  // Which encoder produces features for inference.
  enum class Stream { kSource, kTarget };
  const Encoder& encoder(Stream stream) const;

  // Full-resolution mask probabilities for raw inputs of any size:
  // image [n,3,H,W], flow [n,2,H,W] in pixels/frame. Returns [n,1,H,W].
  Tensor predict(const Tensor& image, const Tensor& flow, Stream stream = Stream::kSource) const;

 private:
  ModelConfig config_;
};

// Model-ready inputs: image and normalised 3-channel flow, reflect-padded to
// the encoder stride.
struct ModelInput {
  Tensor image;
  Tensor flow3;
  int height = 0;  // before padding
  int width = 0;
};

ModelInput prepare_input(const Tensor& image, const Tensor& flow, const ModelConfig& config);

// Encoder + fusion, with everything needed for a backward pass.
struct FeaturePass {
  Encoder::Cache encoder_cache;
  Fusion::Cache fusion_cache;
  EncodedFeatures branches;
  Tensor fused;
};

FeaturePass forward_features(const Encoder& encoder, const Fusion& fusion, const Tensor& image,
                             const Tensor& flow3, bool keep_cache);
// `grad_fused` flows back through phi; `grad_flow_extra` (may be empty) is
// added on the flow branch output, e.g. from De^flow.
void backward_features(Encoder& encoder, Fusion& fusion, FeaturePass& pass,
                       const Tensor& grad_fused, const Tensor& grad_flow_extra);

std::uint64_t checksum(const std::vector<const Parameter*>& params);

}  // namespace vosda
