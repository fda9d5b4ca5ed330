#include "vosda/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vosda/augment.hpp"
#include "vosda/error.hpp"
#include "vosda/hash.hpp"

namespace vosda {

namespace {

template <typename Module>
std::vector<const Parameter*> as_const(const Module& module) {
  auto params = const_cast<Module&>(module).parameters();
  return {params.begin(), params.end()};
}

void append(std::vector<Parameter*>& out, std::vector<Parameter*> more) {
  out.insert(out.end(), more.begin(), more.end());
}

std::string stage_name(const std::string& prefix, std::size_t i) {
  return prefix + ".stage" + std::to_string(i + 1) + ".conv";
}

}  // namespace

const char* fusion_mode_name(FusionMode mode) {
  switch (mode) {
    case FusionMode::kConv: return "conv";
    case FusionMode::kProduct: return "product";
    case FusionMode::kAddition: return "addition";
    case FusionMode::kNone: return "none";
  }
  return "?";
}

FusionMode parse_fusion_mode(const std::string& text) {
  if (text == "conv") return FusionMode::kConv;
  if (text == "product") return FusionMode::kProduct;
  if (text == "addition") return FusionMode::kAddition;
  if (text == "none") return FusionMode::kNone;
  throw Error(ErrorCode::kConfigError, "unknown fusion mode '" + text + "'");
}

void ModelConfig::validate() const {
  if (encoder_widths.empty()) throw Error(ErrorCode::kConfigError, "encoder needs a stage");
  if (decoder_widths.size() != encoder_widths.size()) {
    throw Error(ErrorCode::kConfigError,
                "decoder stages must equal encoder stages so output resolution matches input");
  }
  if (discriminator_widths.empty()) {
    throw Error(ErrorCode::kConfigError, "discriminator needs a conv layer");
  }
  auto positive = [](const std::vector<int>& v) {
    return std::all_of(v.begin(), v.end(), [](int w) { return w > 0; });
  };
  if (!positive(encoder_widths) || !positive(decoder_widths) || !positive(discriminator_widths)) {
    throw Error(ErrorCode::kConfigError, "layer widths must be positive");
  }
  if (!(flow_scale > 0.0)) throw Error(ErrorCode::kConfigError, "flow_scale must be > 0");
}

std::string ModelConfig::fingerprint() const {
  std::ostringstream os;
  auto list = [&os](const std::vector<int>& v) {
    for (int x : v) os << x << ',';
    os << ';';
  };
  list(encoder_widths);
  list(decoder_widths);
  list(discriminator_widths);
  os << fusion_mode_name(fusion) << ';';
  os.precision(17);
  os << flow_scale;
  Fnv1a h;
  h.update(os.str());
  return h.hex();
}

// --- BranchEncoder -------------------------------------------------------

BranchEncoder::BranchEncoder(const std::string& prefix, int in_channels,
                             const std::vector<int>& widths) {
  int in = in_channels;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    stages_.emplace_back(stage_name(prefix, i), in, widths[i], 3, 2, 1);
    in = widths[i];
  }
}

Tensor BranchEncoder::forward(const Tensor& x, Cache* cache) const {
  if (cache) {
    cache->convs.assign(stages_.size(), {});
    cache->activations.assign(stages_.size(), {});
  }
  Tensor h = x;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    h = relu(stages_[i].forward(h, cache ? &cache->convs[i] : nullptr));
    if (cache) cache->activations[i] = h;
  }
  return h;
}

void BranchEncoder::backward(const Tensor& grad_out, Cache& cache) {
  Tensor g = grad_out;
  for (std::size_t i = stages_.size(); i-- > 0;) {
    g = relu_backward(g, cache.activations[i]);
    g = stages_[i].backward(g, cache.convs[i], i > 0);
  }
}

void BranchEncoder::initialize(std::mt19937_64& rng) {
  for (auto& s : stages_) s.initialize(rng);
}

void BranchEncoder::rename(const std::string& prefix) {
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    stages_[i].weight.name = stage_name(prefix, i) + ".w";
    stages_[i].bias.name = stage_name(prefix, i) + ".b";
  }
}

std::vector<Parameter*> BranchEncoder::parameters() {
  std::vector<Parameter*> out;
  for (auto& s : stages_) {
    out.push_back(&s.weight);
    out.push_back(&s.bias);
  }
  return out;
}

std::vector<const Parameter*> BranchEncoder::parameters() const { return as_const(*this); }

// --- Encoder -------------------------------------------------------------

Encoder::Encoder(const std::string& prefix, const ModelConfig& config)
    : prefix_(prefix),
      stride_(config.stride()),
      has_flow_(config.has_flow_branch()),
      appearance_(prefix + ".app", 3, config.encoder_widths) {
  if (has_flow_) flow_ = BranchEncoder(prefix + ".flow", 3, config.encoder_widths);
}

EncodedFeatures Encoder::forward(const Tensor& image, const Tensor& flow3, Cache* cache) const {
  if (image.h() % stride_ != 0 || image.w() % stride_ != 0) {
    throw Error(ErrorCode::kShapeError, "input " + image.shape_string() +
                                            " not divisible by encoder stride " +
                                            std::to_string(stride_));
  }
  EncodedFeatures out;
  out.appearance = appearance_.forward(image, cache ? &cache->appearance : nullptr);
  if (has_flow_) {
    if (flow3.c() != 3 || flow3.n() != image.n() || flow3.h() != image.h() ||
        flow3.w() != image.w()) {
      throw Error(ErrorCode::kShapeError,
                  "flow " + flow3.shape_string() + " vs image " + image.shape_string());
    }
    out.flow = flow_.forward(flow3, cache ? &cache->flow : nullptr);
  }
  return out;
}

void Encoder::backward(const Tensor& grad_appearance, const Tensor& grad_flow, Cache& cache) {
  if (!grad_appearance.empty()) appearance_.backward(grad_appearance, cache.appearance);
  if (has_flow_ && !grad_flow.empty()) flow_.backward(grad_flow, cache.flow);
}

void Encoder::initialize(std::mt19937_64& rng) {
  appearance_.initialize(rng);
  if (has_flow_) flow_.initialize(rng);
}

std::vector<Parameter*> Encoder::parameters() {
  auto out = appearance_.parameters();
  if (has_flow_) append(out, flow_.parameters());
  return out;
}

std::vector<const Parameter*> Encoder::parameters() const { return as_const(*this); }

Encoder init_target_encoder(const Encoder& source) {
  for (const Parameter* p : source.parameters()) {
    for (double v : p->value) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteValue, "source encoder parameter " + p->name);
      }
    }
  }
  Encoder copy = source;
  copy.prefix_ = "en_t";
  copy.appearance_.rename("en_t.app");
  if (copy.has_flow_) copy.flow_.rename("en_t.flow");
  for (Parameter* p : copy.parameters()) p->zero_grad();
  return copy;
}

// --- Fusion --------------------------------------------------------------

Fusion::Fusion(const std::string& prefix, FusionMode mode, int channels)
    : mode_(mode), channels_(channels) {
  if (mode == FusionMode::kConv) conv_.emplace(prefix + ".conv", 2 * channels, channels, 3, 1, 1);
}

Tensor Fusion::forward(const Tensor& appearance, const Tensor& flow, Cache* cache) const {
  if (mode_ == FusionMode::kNone) return appearance;
  if (appearance.n() != flow.n() || appearance.h() != flow.h() || appearance.w() != flow.w()) {
    throw Error(ErrorCode::kShapeError, "fusion inputs " + appearance.shape_string() + " and " +
                                            flow.shape_string());
  }
  if (mode_ != FusionMode::kConv && appearance.c() != flow.c()) {
    throw Error(ErrorCode::kShapeError, std::string(fusion_mode_name(mode_)) +
                                            " fusion needs equal channels: " +
                                            appearance.shape_string() + " vs " +
                                            flow.shape_string());
  }
  if (cache) {
    cache->appearance = appearance;
    cache->flow = flow;
  }
  switch (mode_) {
    case FusionMode::kProduct: return multiply(appearance, flow);
    case FusionMode::kAddition: return add(appearance, flow);
    case FusionMode::kConv:
      return conv_->forward(Tensor::concat_channels(appearance, flow),
                            cache ? &cache->conv : nullptr);
    case FusionMode::kNone: break;
  }
  return appearance;
}

std::pair<Tensor, Tensor> Fusion::backward(const Tensor& grad_out, Cache& cache) {
  switch (mode_) {
    case FusionMode::kNone: return {grad_out, Tensor{}};
    case FusionMode::kAddition: return {grad_out, grad_out};
    case FusionMode::kProduct:
      return {multiply(grad_out, cache.flow), multiply(grad_out, cache.appearance)};
    case FusionMode::kConv: {
      Tensor g = conv_->backward(grad_out, cache.conv, true);
      return Tensor::split_channels(g, cache.appearance.c());
    }
  }
  return {};
}

void Fusion::initialize(std::mt19937_64& rng) {
  if (conv_) conv_->initialize(rng);
}

std::vector<Parameter*> Fusion::parameters() {
  if (!conv_) return {};
  return {&conv_->weight, &conv_->bias};
}

std::vector<const Parameter*> Fusion::parameters() const { return as_const(*this); }

// --- Decoder -------------------------------------------------------------

Decoder::Decoder(const std::string& prefix, int in_channels, const std::vector<int>& widths) {
  int in = in_channels;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    stages_.emplace_back(stage_name(prefix, i), in, widths[i], 3, 1, 1);
    in = widths[i];
  }
  head_ = Conv2d(prefix + ".head", in, 1, 1, 1, 0);
}

Tensor Decoder::forward(const Tensor& x, Cache* cache) const {
  if (cache) {
    cache->convs.assign(stages_.size(), {});
    cache->activations.assign(stages_.size(), {});
  }
  Tensor h = x;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    h = relu(stages_[i].forward(h, cache ? &cache->convs[i] : nullptr));
    if (cache) cache->activations[i] = h;
    h = upsample2x(h);
  }
  Tensor prob = sigmoid(head_.forward(h, cache ? &cache->head : nullptr));
  if (cache) cache->output = prob;
  return prob;
}

Tensor Decoder::backward(const Tensor& grad_prob, Cache& cache) {
  Tensor g = sigmoid_backward(grad_prob, cache.output);
  g = head_.backward(g, cache.head, true);
  for (std::size_t i = stages_.size(); i-- > 0;) {
    g = upsample2x_backward(g);
    g = relu_backward(g, cache.activations[i]);
    g = stages_[i].backward(g, cache.convs[i], true);
  }
  return g;
}

void Decoder::initialize(std::mt19937_64& rng) {
  for (auto& s : stages_) s.initialize(rng);
  head_.initialize(rng);
}

std::vector<Parameter*> Decoder::parameters() {
  std::vector<Parameter*> out;
  for (auto& s : stages_) {
    out.push_back(&s.weight);
    out.push_back(&s.bias);
  }
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

std::vector<const Parameter*> Decoder::parameters() const { return as_const(*this); }

// --- Discriminator -------------------------------------------------------

Discriminator::Discriminator(const std::string& prefix, int in_channels,
                             const std::vector<int>& widths) {
  int in = in_channels;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    convs_.emplace_back(prefix + ".conv" + std::to_string(i + 1), in, widths[i], 3, 2, 1);
    in = widths[i];
  }
  head_ = Conv2d(prefix + ".head", in, 1, 1, 1, 0);
}

Tensor Discriminator::forward(const Tensor& x, Cache* cache) const {
  if (cache) {
    cache->convs.assign(convs_.size(), {});
    cache->activations.assign(convs_.size(), {});
  }
  Tensor h = x;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    h = relu(convs_[i].forward(h, cache ? &cache->convs[i] : nullptr));
    if (cache) cache->activations[i] = h;
  }
  if (cache) {
    cache->pooled_h = h.h();
    cache->pooled_w = h.w();
  }
  Tensor prob = sigmoid(head_.forward(global_average_pool(h), cache ? &cache->head : nullptr));
  if (cache) cache->output = prob;
  return prob;
}

Tensor Discriminator::backward(const Tensor& grad_prob, Cache& cache) {
  Tensor g = sigmoid_backward(grad_prob, cache.output);
  g = head_.backward(g, cache.head, true);
  g = global_average_pool_backward(g, cache.pooled_h, cache.pooled_w);
  for (std::size_t i = convs_.size(); i-- > 0;) {
    g = relu_backward(g, cache.activations[i]);
    g = convs_[i].backward(g, cache.convs[i], true);
  }
  return g;
}

void Discriminator::initialize(std::mt19937_64& rng) {
  for (auto& c : convs_) c.initialize(rng);
  head_.initialize(rng);
}

std::vector<Parameter*> Discriminator::parameters() {
  std::vector<Parameter*> out;
  for (auto& c : convs_) {
    out.push_back(&c.weight);
    out.push_back(&c.bias);
  }
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

std::vector<const Parameter*> Discriminator::parameters() const { return as_const(*this); }

// --- Network -------------------------------------------------------------

const char* param_group_name(ParamGroup group) {
  switch (group) {
    case ParamGroup::kSourceEncoder: return "en_s";
    case ParamGroup::kTargetEncoder: return "en_t";
    case ParamGroup::kFusion: return "fuse";
    case ParamGroup::kDecoder: return "de";
    case ParamGroup::kFlowDecoder: return "de_flow";
    case ParamGroup::kDiscriminator: return "disc";
  }
  return "?";
}

Network::Network(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const int channels = config_.feature_channels();
  en_s = Encoder("en_s", config_);
  fusion = Fusion("fuse", config_.fusion, channels);
  decoder = Decoder("de", channels, config_.decoder_widths);
  if (config_.has_flow_branch()) flow_decoder.emplace("de_flow", channels, config_.decoder_widths);
  disc = Discriminator("disc", channels, config_.discriminator_widths);

  std::mt19937_64 rng(seed);
  en_s.initialize(rng);
  fusion.initialize(rng);
  decoder.initialize(rng);
  if (flow_decoder) flow_decoder->initialize(rng);
  disc.initialize(rng);
}

std::vector<Parameter*> Network::parameters(ParamGroup group) {
  switch (group) {
    case ParamGroup::kSourceEncoder: return en_s.parameters();
    case ParamGroup::kTargetEncoder:
      return en_t ? en_t->parameters() : std::vector<Parameter*>{};
    case ParamGroup::kFusion: return fusion.parameters();
    case ParamGroup::kDecoder: return decoder.parameters();
    case ParamGroup::kFlowDecoder:
      return flow_decoder ? flow_decoder->parameters() : std::vector<Parameter*>{};
    case ParamGroup::kDiscriminator: return disc.parameters();
  }
  return {};
}

std::vector<const Parameter*> Network::parameters(ParamGroup group) const {
  auto params = const_cast<Network*>(this)->parameters(group);
  return {params.begin(), params.end()};
}

std::vector<Parameter*> Network::all_parameters() {
  std::vector<Parameter*> out;
  for (ParamGroup g : {ParamGroup::kSourceEncoder, ParamGroup::kTargetEncoder, ParamGroup::kFusion,
                       ParamGroup::kDecoder, ParamGroup::kFlowDecoder,
                       ParamGroup::kDiscriminator}) {
    append(out, parameters(g));
  }
  return out;
}

std::vector<const Parameter*> Network::all_parameters() const {
  auto params = const_cast<Network*>(this)->all_parameters();
  return {params.begin(), params.end()};
}

void Network::zero_grad() {
  for (Parameter* p : all_parameters()) p->zero_grad();
}

const Encoder& Network::encoder(Stream stream) const {
  if (stream == Stream::kTarget) {
    if (!en_t) throw Error(ErrorCode::kUsage, "network has no target encoder");
    return *en_t;
  }
  return en_s;
}

Tensor Network::predict(const Tensor& image, const Tensor& flow, Stream stream) const {
  ModelInput in = prepare_input(image, flow, config_);
  FeaturePass pass = forward_features(encoder(stream), fusion, in.image, in.flow3, false);
  Tensor prob = decoder.forward(pass.fused, nullptr);
  if (prob.h() == in.height && prob.w() == in.width) return prob;
  return prob.crop(0, 0, in.height, in.width);
}

ModelInput prepare_input(const Tensor& image, const Tensor& flow, const ModelConfig& config) {
  if (image.c() != 3) throw Error(ErrorCode::kShapeError, "image must have 3 channels");
  ModelInput in;
  in.height = image.h();
  in.width = image.w();
  in.image = reflect_pad_to_multiple(image, config.stride());
  if (config.has_flow_branch()) {
    if (flow.c() != 2 || flow.n() != image.n() || flow.h() != image.h() ||
        flow.w() != image.w()) {
      throw Error(ErrorCode::kShapeError,
                  "flow " + flow.shape_string() + " does not match image " + image.shape_string());
    }
    Tensor scaled = flow;
    const double inv = 1.0 / config.flow_scale;
    for (double& v : scaled.values()) v *= inv;
    in.flow3 = reflect_pad_to_multiple(pad_flow_channels(scaled), config.stride());
  }
  return in;
}

FeaturePass forward_features(const Encoder& encoder, const Fusion& fusion, const Tensor& image,
                             const Tensor& flow3, bool keep_cache) {
  FeaturePass pass;
  pass.branches = encoder.forward(image, flow3, keep_cache ? &pass.encoder_cache : nullptr);
  pass.fused = fusion.forward(pass.branches.appearance, pass.branches.flow,
                              keep_cache ? &pass.fusion_cache : nullptr);
  return pass;
}

void backward_features(Encoder& encoder, Fusion& fusion, FeaturePass& pass,
                       const Tensor& grad_fused, const Tensor& grad_flow_extra) {
  auto [g_app, g_flow] = fusion.backward(grad_fused, pass.fusion_cache);
  if (!grad_flow_extra.empty()) {
    if (g_flow.empty()) {
      g_flow = grad_flow_extra;
    } else {
      g_flow += grad_flow_extra;
    }
  }
  encoder.backward(g_app, g_flow, pass.encoder_cache);
}

std::uint64_t checksum(const std::vector<const Parameter*>& params) {
  Fnv1a h;
  for (const Parameter* p : params) {
    h.update(p->name);
    h.update(p->value.data(), p->value.size() * sizeof(double));
  }
  return h.digest();
}

}  // namespace vosda
