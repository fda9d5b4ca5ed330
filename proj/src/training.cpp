#include "vosda/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "vosda/augment.hpp"
#include "vosda/davis.hpp"
#include "vosda/error.hpp"
#include "vosda/losses.hpp"
#include "vosda/metrics.hpp"
#include "vosda/optimizer.hpp"

namespace vosda {

namespace {

constexpr std::uint64_t kSourceStream = 1;
constexpr std::uint64_t kTargetStream = 2;
constexpr std::uint64_t kAugmentStream = 3;

std::mt19937_64 make_rng(std::uint64_t seed, int epoch, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

// Endless reshuffled pass over a sample pool.
class IndexStream {
 public:
  IndexStream(std::size_t size, std::mt19937_64 rng) : rng_(std::move(rng)), order_(size) {
    if (size == 0) throw Error(ErrorCode::kEmptyInput, "empty sample pool");
    reshuffle();
  }

  std::vector<std::size_t> next(std::size_t count) {
    std::vector<std::size_t> out;
    while (out.size() < count) {
      if (pos_ == order_.size()) reshuffle();
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  void reshuffle() {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }

  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

struct Inputs {
  Tensor image;
  Tensor flow3;
  Tensor mask;  // empty for target batches
};

Inputs draw_batch(const std::vector<FrameSample>& pool, const std::vector<std::size_t>& indices,
                  const TrainConfig& config, const ModelConfig& model, std::mt19937_64& rng,
                  bool labels) {
  AugmentOptions opts;
  opts.flip = config.augment_flip;
  opts.color_jitter = config.augment_jitter;
  std::vector<FrameSample> augmented;
  augmented.reserve(indices.size());
  for (std::size_t i : indices) augmented.push_back(augment(pool[i], config.crop, rng, opts));
  std::vector<const FrameSample*> ptrs;
  for (const auto& s : augmented) ptrs.push_back(&s);
  Batch batch = make_batch(ptrs, labels);
  ModelInput in = prepare_input(batch.image, batch.flow, model);
  return {std::move(in.image), std::move(in.flow3), std::move(batch.mask)};
}

std::vector<Parameter*> concat(std::initializer_list<std::vector<Parameter*>> groups) {
  std::vector<Parameter*> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

std::uint64_t group_checksum(const std::vector<Parameter*>& params) {
  return checksum(std::vector<const Parameter*>(params.begin(), params.end()));
}

void expect_unchanged(std::uint64_t before, const std::vector<Parameter*>& params, const char* what,
                      long step) {
  if (group_checksum(params) != before) {
    throw Error(ErrorCode::kIsolationViolation,
                std::string(what) + " changed at step " + std::to_string(step));
  }
}

[[noreturn]] void rethrow_at_step(const Error& e, long step) {
  throw Error(e.code(), "step " + std::to_string(step) + ": " + e.message());
}

// Source-domain supervised update shared by the supervised and shared regimes.
struct SupervisedOutcome {
  double l_main = 0.0;
  double l_flow = 0.0;
  double l_s = 0.0;
};

SupervisedOutcome supervised_substep(Network& net, const Inputs& in, const TrainConfig& config,
                                     Sgd& opt, double lr) {
  LossWeights w = config.loss;
  if (!config.flow_supervision) w.alpha2 = 0.0;
  net.zero_grad();
  FeaturePass pass = forward_features(net.en_s, net.fusion, in.image, in.flow3, true);
  Decoder::Cache dcache;
  const Tensor p_main = net.decoder.forward(pass.fused, &dcache);
  SupervisedOutcome out;
  out.l_main = mask_loss(in.mask, p_main, w.eps);
  Tensor g_main = mask_loss_grad(in.mask, p_main, w.eps);
  for (double& g : g_main.values()) g *= w.alpha1;
  const Tensor g_fused = net.decoder.backward(g_main, dcache);

  Tensor g_flow_extra;
  std::vector<Parameter*> params =
      concat({net.en_s.parameters(), net.fusion.parameters(), net.decoder.parameters()});
  if (config.flow_supervision) {
    Decoder::Cache fcache;
    const Tensor p_flow = net.flow_decoder->forward(pass.branches.flow, &fcache);
    out.l_flow = mask_loss(in.mask, p_flow, w.eps);
    Tensor g_flow = mask_loss_grad(in.mask, p_flow, w.eps);
    for (double& g : g_flow.values()) g *= w.alpha2;
    g_flow_extra = net.flow_decoder->backward(g_flow, fcache);
    const auto fp = net.flow_decoder->parameters();
    params.insert(params.end(), fp.begin(), fp.end());
  }
  backward_features(net.en_s, net.fusion, pass, g_fused, g_flow_extra);
  out.l_s = w.alpha1 * out.l_main + w.alpha2 * out.l_flow;
  opt.step(params, {lr, config.momentum, config.weight_decay});
  return out;
}

double source_validation_j(const Network& net, const TrainConfig& config,
                           const std::vector<FrameSample>& val) {
  EvalOptions opts;
  opts.threshold = config.threshold;
  opts.tol_radius = config.tol_radius;
  return evaluate_dataset(net, val, opts).j.mean;
}

bool validate_now(const TrainConfig& config, int epoch, int last_epoch) {
  if (config.val_every <= 0) return false;
  return (epoch + 1) % config.val_every == 0 || epoch == last_epoch;
}

void save_epoch(const Network& net, const TrainConfig& config, const TrainingState& state,
                const TrainOptions& options) {
  if (options.checkpoint_dir.empty()) return;
  save_checkpoint(net, config, state, options.checkpoint_dir / "last.ckpt");
  if (options.keep_epoch_checkpoints) {
    char name[32];
    std::snprintf(name, sizeof name, "epoch_%03d.ckpt", state.epoch);
    save_checkpoint(net, config, state, options.checkpoint_dir / name);
  }
}

void record_step(TrainResult& r, const StepRecord& rec, const TrainOptions& options) {
  r.history.steps.push_back(rec);
  if (options.on_step) options.on_step(rec);
}

void record_epoch(TrainResult& r, const EpochRecord& rec, const TrainOptions& options) {
  r.history.epochs.push_back(rec);
  if (options.on_epoch) options.on_epoch(rec, r.network);
}

void start_from(TrainResult& r, const TrainConfig& config, const TrainOptions& options) {
  if (options.resume) {
    if (options.resume->network.config().fingerprint() != config.model_config().fingerprint()) {
      throw Error(ErrorCode::kFingerprintMismatch, "resume checkpoint has a different architecture");
    }
    r.network = options.resume->network;
    r.state = options.resume->state;
  } else {
    r.network = Network(config.model_config(), config.seed);
  }
}

bool budget_left(const TrainConfig& config, long step) {
  return config.max_steps <= 0 || step < config.max_steps;
}

Tensor encode_fused(const Encoder& encoder, const Fusion& fusion, const Inputs& in) {
  return forward_features(encoder, fusion, in.image, in.flow3, false).fused;
}

}  // namespace

TrainData load_train_data(const TrainConfig& config) {
  TrainData data;
  if (config.source.empty()) throw Error(ErrorCode::kConfigError, "source: dataset path required");
  const auto src_train = load_davis_layout(config.source, Split::kTrain, true);
  data.source_train = load_samples(src_train, true, Domain::kSource);
  const auto src_val = load_davis_layout(config.source, parse_split(config.source_val_split), true);
  data.source_val = load_samples(src_val, true, Domain::kSource);
  if (config.regime != Regime::kSupervised) {
    if (config.target.empty()) throw Error(ErrorCode::kConfigError, "target: dataset path required");
    const auto tgt_train = load_davis_layout(config.target, Split::kTrain, false);
    data.target_train = load_samples(tgt_train, false, Domain::kTarget);
    const auto tgt_val = load_davis_layout(config.target, parse_split(config.target_val_split), false);
    data.target_val = load_samples(tgt_val, false, Domain::kTarget);
  }
  return data;
}

TrainData with_unlabeled_target(TrainData data) {
  data.target_train = unlabeled_view(data.target_train);
  data.target_val = unlabeled_view(data.target_val);
  return data;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string TrainHistory::to_csv() const {
  std::ostringstream os;
  os << "step,epoch,l_s,l_msk_main,l_msk_flow,l_ent,l_d,lambda1,lr,disc_acc\n";
  for (const auto& r : steps) {
    os << r.step << ',' << r.epoch << ',' << num(r.l_s) << ',' << num(r.l_msk_main) << ','
       << num(r.l_msk_flow) << ',' << num(r.l_ent) << ',' << num(r.l_d) << ',' << num(r.lambda1)
       << ',' << num(r.lr) << ',' << num(r.disc_acc) << '\n';
  }
  return os.str();
}

std::string TrainHistory::epochs_csv() const {
  std::ostringstream os;
  os << "epoch,val_j,heldout_disc_acc\n";
  for (const auto& e : epochs)
    os << e.epoch << ',' << num(e.val_j) << ',' << num(e.heldout_disc_acc) << '\n';
  return os.str();
}

namespace {

void validate_samples(const TrainData& data) {
  for (const auto* set : {&data.source_train, &data.source_val, &data.target_train, &data.target_val})
    for (const FrameSample& s : *set) s.validate();
}

}  // namespace

TrainResult train_supervised(const TrainConfig& config, const TrainData& data,
                             const TrainOptions& options) {
  config.validate();
  validate_samples(data);
  if (data.source_train.empty()) throw Error(ErrorCode::kEmptyInput, "no source training samples");
  const ModelConfig model = config.model_config();
  TrainResult r;
  start_from(r, config, options);
  Network& net = r.network;
  Sgd& opt = r.state.optimizers["seg"];

  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const long steps_per_epoch =
      static_cast<long>((data.source_train.size() + batch - 1) / batch);
  const std::vector<Parameter*> flow_decoder =
      net.flow_decoder ? net.flow_decoder->parameters() : std::vector<Parameter*>{};
  const std::uint64_t flow_decoder_sum = group_checksum(flow_decoder);

  for (int epoch = r.state.epoch; epoch < config.epochs && budget_left(config, r.state.step);
       ++epoch) {
    IndexStream order(data.source_train.size(), make_rng(config.seed, epoch, kSourceStream));
    auto aug_rng = make_rng(config.seed, epoch, kAugmentStream);
    const double lr = lr_schedule(config.lr, epoch, config.lr_decay);
    long in_epoch = 0;
    for (; in_epoch < steps_per_epoch && budget_left(config, r.state.step); ++in_epoch) {
      StepRecord rec;
      rec.step = r.state.step;
      rec.epoch = epoch;
      rec.lr = lr;
      try {
        const Inputs in =
            draw_batch(data.source_train, order.next(batch), config, model, aug_rng, true);
        const SupervisedOutcome s = supervised_substep(net, in, config, opt, lr);
        rec.l_s = s.l_s;
        rec.l_msk_main = s.l_main;
        rec.l_msk_flow = s.l_flow;
        if (options.verify_isolation && !config.flow_supervision) {
          expect_unchanged(flow_decoder_sum, flow_decoder, "de_flow", rec.step);
          ++r.isolation_checks;
        }
      } catch (const Error& e) {
        rethrow_at_step(e, rec.step);
      }
      ++r.state.step;
      record_step(r, rec, options);
    }
    if (in_epoch < steps_per_epoch) break;  // step budget ran out mid-epoch
    r.state.epoch = epoch + 1;
    EpochRecord er;
    er.epoch = epoch;
    if (!data.source_val.empty() && validate_now(config, epoch, config.epochs - 1))
      er.val_j = source_validation_j(net, config, data.source_val);
    record_epoch(r, er, options);
    save_epoch(net, config, r.state, options);
  }
  return r;
}

TrainResult train_uda_shared(const TrainConfig& config, const TrainData& data,
                             const TrainOptions& options) {
  config.validate();
  validate_samples(data);
  if (data.source_train.empty()) throw Error(ErrorCode::kEmptyInput, "no source training samples");
  if (data.target_train.empty()) throw Error(ErrorCode::kEmptyInput, "no target training samples");
  const ModelConfig model = config.model_config();
  TrainResult r;
  start_from(r, config, options);
  if (!options.resume && !config.warm_start.empty()) {
    Checkpoint warm = load_checkpoint(config.warm_start, &model);
    for (Parameter* p : r.network.all_parameters()) {
      for (const Parameter* q : warm.network.all_parameters())
        if (q->name == p->name) p->value = q->value;
    }
  }
  Network& net = r.network;
  Sgd& seg = r.state.optimizers["seg"];
  Sgd& adv = r.state.optimizers["adv"];
  Sgd& dopt = r.state.optimizers["disc"];
  const LossWeights& w = config.loss;

  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const long steps_per_epoch =
      static_cast<long>((data.target_train.size() + batch - 1) / batch);

  for (int epoch = r.state.epoch; epoch < config.epochs && budget_left(config, r.state.step);
       ++epoch) {
    IndexStream src_order(data.source_train.size(), make_rng(config.seed, epoch, kSourceStream));
    IndexStream tgt_order(data.target_train.size(), make_rng(config.seed, epoch, kTargetStream));
    auto aug_rng = make_rng(config.seed, epoch, kAugmentStream);
    const double lr = lr_schedule(config.lr, epoch, config.lr_decay);
    const double disc_lr = lr_schedule(config.disc_lr, epoch, config.lr_decay);
    const double lambda1 = lambda1_schedule(epoch, config.epochs);
    long in_epoch = 0;
    for (; in_epoch < steps_per_epoch && budget_left(config, r.state.step); ++in_epoch) {
      StepRecord rec;
      rec.step = r.state.step;
      rec.epoch = epoch;
      rec.lr = lr;
      rec.lambda1 = lambda1;
      try {
        // (1) supervised update on a source batch.
        const Inputs src =
            draw_batch(data.source_train, src_order.next(batch), config, model, aug_rng, true);
        const SupervisedOutcome s = supervised_substep(net, src, config, seg, lr);
        rec.l_s = s.l_s;
        rec.l_msk_main = s.l_main;
        rec.l_msk_flow = s.l_flow;

        // (2) the shared encoder learns to fool D on a target batch.
        const Inputs tgt =
            draw_batch(data.target_train, tgt_order.next(batch), config, model, aug_rng, false);
        const auto disc_params = net.disc.parameters();
        const std::uint64_t disc_before =
            options.verify_isolation ? group_checksum(disc_params) : 0;
        if (lambda1 > 0.0) {
          net.zero_grad();
          FeaturePass pass = forward_features(net.en_s, net.fusion, tgt.image, tgt.flow3, true);
          Discriminator::Cache dc;
          const Tensor d_t = net.disc.forward(pass.fused, &dc);
          rec.l_ent = confusion_loss(d_t, w.eps);
          Tensor g = confusion_loss_grad(d_t, w.eps);
          for (double& v : g.values()) v *= lambda1;
          const Tensor g_fused = net.disc.backward(g, dc);
          backward_features(net.en_s, net.fusion, pass, g_fused, Tensor{});
          adv.step(concat({net.en_s.parameters(), net.fusion.parameters()}),
                   {lr, config.momentum, 0.0});
        } else {
          rec.l_ent = confusion_loss(net.disc.forward(encode_fused(net.en_s, net.fusion, tgt), nullptr),
                                     w.eps);
        }
        if (options.verify_isolation) {
          expect_unchanged(disc_before, disc_params, "disc", rec.step);
          ++r.isolation_checks;
        }

        // (3) D separates the latest source batch from the target batch.
        const auto frozen = concat({net.en_s.parameters(), net.fusion.parameters(),
                                    net.decoder.parameters()});
        const std::uint64_t frozen_before = options.verify_isolation ? group_checksum(frozen) : 0;
        net.zero_grad();
        const Tensor x_s = encode_fused(net.en_s, net.fusion, src);
        const Tensor x_t = encode_fused(net.en_s, net.fusion, tgt);
        Discriminator::Cache cs;
        Discriminator::Cache ct;
        const Tensor d_s = net.disc.forward(x_s, &cs);
        const Tensor d_t = net.disc.forward(x_t, &ct);
        rec.l_d = discriminator_loss(d_s, d_t, w.eps);
        rec.disc_acc = discriminator_accuracy(d_s, d_t);
        Tensor gs = discriminator_loss_grad_source(d_s, w.eps);
        Tensor gt = discriminator_loss_grad_target(d_t, w.eps);
        for (double& v : gs.values()) v *= w.lambda2;
        for (double& v : gt.values()) v *= w.lambda2;
        net.disc.backward(gs, cs);
        net.disc.backward(gt, ct);
        dopt.step(disc_params, {disc_lr, config.disc_momentum, config.weight_decay});
        if (options.verify_isolation) {
          expect_unchanged(frozen_before, frozen, "encoder", rec.step);
          ++r.isolation_checks;
        }
      } catch (const Error& e) {
        rethrow_at_step(e, rec.step);
      }
      ++r.state.step;
      record_step(r, rec, options);
    }
    if (in_epoch < steps_per_epoch) break;
    r.state.epoch = epoch + 1;
    EpochRecord er;
    er.epoch = epoch;
    if (validate_now(config, epoch, config.epochs - 1)) {
      if (!data.source_val.empty()) er.val_j = source_validation_j(net, config, data.source_val);
      if (!data.source_val.empty() && !data.target_val.empty())
        er.heldout_disc_acc = heldout_discriminator_accuracy(net, data.source_val, data.target_val,
                                                             Network::Stream::kSource);
    }
    record_epoch(r, er, options);
    save_epoch(net, config, r.state, options);
  }
  if (!data.source_val.empty() && !data.target_val.empty())
    r.heldout_disc_acc = heldout_discriminator_accuracy(net, data.source_val, data.target_val,
                                                        Network::Stream::kSource);
  return r;
}

TrainResult train_uda_separated(const TrainConfig& config, const Network& source,
                                const TrainData& data, const TrainOptions& options) {
  config.validate();
  validate_samples(data);
  if (config.m_iters < 1 || config.n_iters < 1)
    throw Error(ErrorCode::kConfigError, "m_iters and n_iters must be >= 1");
  if (data.source_train.empty()) throw Error(ErrorCode::kEmptyInput, "no source training samples");
  if (data.target_train.empty()) throw Error(ErrorCode::kEmptyInput, "no target training samples");
  const ModelConfig model = config.model_config();
  if (source.config().fingerprint() != model.fingerprint()) {
    throw Error(ErrorCode::kFingerprintMismatch,
                "source checkpoint architecture differs from the run config");
  }
  TrainResult r;
  if (options.resume) {
    r.network = options.resume->network;
    r.state = options.resume->state;
    if (!r.network.en_t) r.network.create_target_encoder();
  } else {
    r.network = source;
    r.network.create_target_encoder();
  }
  Network& net = r.network;
  Encoder& en_t = *net.en_t;
  Sgd& dopt = r.state.optimizers["disc"];
  Sgd& topt = r.state.optimizers["en_t"];
  const LossWeights& w = config.loss;

  const auto frozen = concat({net.en_s.parameters(), net.fusion.parameters(),
                              net.decoder.parameters()});
  const std::uint64_t frozen_sum = group_checksum(frozen);
  const auto disc_params = net.disc.parameters();
  const auto target_params = en_t.parameters();

  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const long per_step = static_cast<long>(batch) * config.m_iters;
  const long steps_per_epoch = std::max<long>(
      1, (static_cast<long>(data.target_train.size()) + per_step - 1) / per_step);

  for (int epoch = r.state.epoch; epoch < config.uda_epochs && budget_left(config, r.state.step);
       ++epoch) {
    IndexStream src_order(data.source_train.size(), make_rng(config.seed, epoch, kSourceStream));
    IndexStream tgt_order(data.target_train.size(), make_rng(config.seed, epoch, kTargetStream));
    auto aug_rng = make_rng(config.seed, epoch, kAugmentStream);
    const double lr = lr_schedule(config.uda_lr, epoch, config.lr_decay);
    const SgdOptions sgd{lr, config.uda_momentum, config.weight_decay};
    const double disc_base = config.uda_disc_lr > 0.0 ? config.uda_disc_lr : config.uda_lr;
    const SgdOptions disc_sgd{lr_schedule(disc_base, epoch, config.lr_decay), config.uda_momentum,
                              config.weight_decay};
    long in_epoch = 0;
    for (; in_epoch < steps_per_epoch && budget_left(config, r.state.step); ++in_epoch) {
      StepRecord rec;
      rec.step = r.state.step;
      rec.epoch = epoch;
      rec.lr = lr;
      try {
        for (int i = 0; i < config.n_iters; ++i) {
          const std::uint64_t t_before = options.verify_isolation ? group_checksum(target_params) : 0;
          const Inputs src =
              draw_batch(data.source_train, src_order.next(batch), config, model, aug_rng, false);
          const Inputs tgt =
              draw_batch(data.target_train, tgt_order.next(batch), config, model, aug_rng, false);
          net.zero_grad();
          Discriminator::Cache cs;
          Discriminator::Cache ct;
          const Tensor d_s = net.disc.forward(encode_fused(net.en_s, net.fusion, src), &cs);
          const Tensor d_t = net.disc.forward(encode_fused(en_t, net.fusion, tgt), &ct);
          rec.l_d = discriminator_loss(d_s, d_t, w.eps);
          rec.disc_acc = discriminator_accuracy(d_s, d_t);
          Tensor gs = discriminator_loss_grad_source(d_s, w.eps);
          Tensor gt = discriminator_loss_grad_target(d_t, w.eps);
          for (double& v : gs.values()) v *= w.beta2;
          for (double& v : gt.values()) v *= w.beta2;
          net.disc.backward(gs, cs);
          net.disc.backward(gt, ct);
          dopt.step(disc_params, disc_sgd);
          if (options.verify_isolation) {
            expect_unchanged(t_before, target_params, "en_t", rec.step);
            ++r.isolation_checks;
          }
        }
        for (int i = 0; i < config.m_iters; ++i) {
          const std::uint64_t d_before = options.verify_isolation ? group_checksum(disc_params) : 0;
          const Inputs tgt =
              draw_batch(data.target_train, tgt_order.next(batch), config, model, aug_rng, false);
          net.zero_grad();
          FeaturePass pass = forward_features(en_t, net.fusion, tgt.image, tgt.flow3, true);
          Discriminator::Cache dc;
          const Tensor d_t = net.disc.forward(pass.fused, &dc);
          rec.l_ent = confusion_loss(d_t, w.eps);
          Tensor g = confusion_loss_grad(d_t, w.eps);
          for (double& v : g.values()) v *= w.beta1;
          backward_features(en_t, net.fusion, pass, net.disc.backward(g, dc), Tensor{});
          topt.step(target_params, sgd);
          if (options.verify_isolation) {
            expect_unchanged(d_before, disc_params, "disc", rec.step);
            ++r.isolation_checks;
          }
        }
        if (options.verify_isolation) {
          expect_unchanged(frozen_sum, frozen, "en_s/fuse/de", rec.step);
          ++r.isolation_checks;
        }
      } catch (const Error& e) {
        rethrow_at_step(e, rec.step);
      }
      ++r.state.step;
      record_step(r, rec, options);
    }
    if (in_epoch < steps_per_epoch) break;
    r.state.epoch = epoch + 1;
    EpochRecord er;
    er.epoch = epoch;
    if (validate_now(config, epoch, config.uda_epochs - 1) && !data.source_val.empty() &&
        !data.target_val.empty()) {
      er.heldout_disc_acc = heldout_discriminator_accuracy(net, data.source_val, data.target_val,
                                                           Network::Stream::kTarget);
    }
    record_epoch(r, er, options);
    save_epoch(net, config, r.state, options);
  }
  net.zero_grad();
  expect_unchanged(frozen_sum, frozen, "en_s/fuse/de", r.state.step);
  if (!data.source_val.empty() && !data.target_val.empty())
    r.heldout_disc_acc = heldout_discriminator_accuracy(net, data.source_val, data.target_val,
                                                        Network::Stream::kTarget);
  return r;
}

double heldout_discriminator_accuracy(const Network& network,
                                      const std::vector<FrameSample>& source,
                                      const std::vector<FrameSample>& target,
                                      Network::Stream target_stream) {
  if (source.empty() || target.empty())
    throw Error(ErrorCode::kEmptyInput, "held-out discriminator accuracy needs both domains");
  const ModelConfig& model = network.config();
  auto probs = [&](const std::vector<FrameSample>& samples, const Encoder& encoder) {
    Tensor out(static_cast<int>(samples.size()), 1, 1, 1);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const ModelInput in = prepare_input(samples[i].image, samples[i].flow, model);
      const Tensor fused = forward_features(encoder, network.fusion, in.image, in.flow3, false).fused;
      out.at(static_cast<int>(i), 0, 0, 0) = network.disc.forward(fused, nullptr).at(0, 0, 0, 0);
    }
    return out;
  };
  return discriminator_accuracy(probs(source, network.en_s),
                                probs(target, network.encoder(target_stream)));
}

}  // namespace vosda
