// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria 3 to 6 train desk-scale models on synthetic data
// and take several minutes on one core.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"
#include "support/tiny_run.hpp"
#include "vosda/checkpoint.hpp"
#include "vosda/davis.hpp"
#include "vosda/error.hpp"
#include "vosda/flo.hpp"
#include "vosda/hash.hpp"
#include "vosda/losses.hpp"
#include "vosda/metrics.hpp"
#include "vosda/synthetic.hpp"
#include "vosda/training.hpp"

namespace fs = std::filesystem;
using namespace vosda;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string join3(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "/" : "") + fmt("%.3f", v[i]);
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Tensor from(std::initializer_list<double> v, int n, int h, int w) {
  Tensor t(n, 1, h, w);
  std::copy(v.begin(), v.end(), t.data());
  return t;
}

std::vector<double> vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

std::uint64_t checksum(const Network& net, ParamGroup group) {
  Fnv1a h;
  for (const Parameter* p : net.parameters(group)) {
    h.update(p->name);
    h.update(p->value.data(), p->value.size() * sizeof(double));
  }
  return h.digest();
}

// 1 ---------------------------------------------------------------------------

Outcome loss_oracles() {
  constexpr double eps = 1e-6;
  Outcome o;
  double worst = 0.0;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  std::bernoulli_distribution bit(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor y(1, 1, 4, 4), pm(1, 1, 4, 4), pf(1, 1, 4, 4), ds(16, 1, 1, 1), dt(16, 1, 1, 1);
    for (double& v : y.values()) v = bit(rng);
    for (Tensor* t : {&pm, &pf, &ds, &dt})
      for (double& v : t->values()) v = prob(rng);
    LossWeights w;
    w.alpha1 = prob(rng);
    w.alpha2 = prob(rng);
    w.beta1 = prob(rng);
    w.beta2 = prob(rng);
    w.lambda1 = prob(rng);
    w.lambda2 = prob(rng);
    const double a = 3 * prob(rng), b = 3 * prob(rng), c = 3 * prob(rng);
    const double errs[] = {
        mask_loss(y, pm, eps) - oracle::bce(vec(y), vec(pm), eps),
        supervised_loss(y, pm, pf, w) - oracle::supervised(vec(y), vec(pm), vec(pf), w.alpha1, w.alpha2, eps),
        confusion_loss(dt, eps) - oracle::confusion(vec(dt), eps),
        discriminator_loss(ds, dt, eps) - oracle::discriminator(vec(ds), vec(dt), eps),
        uda_loss(a, b, w) - oracle::uda(a, b, w.beta1, w.beta2),
        shared_loss(a, b, c, w) - oracle::shared(a, b, c, w.lambda1, w.lambda2),
    };
    for (double e : errs) worst = std::max(worst, std::abs(e));
  }
  o.pass = worst < 1e-6;

  // The written-out sum evaluates to 0.33754; see the README on the rounded figure.
  const double hand = -(std::log(0.9) + std::log(0.8) + std::log(0.6) + std::log(0.6)) / 4.0;
  const double bce = mask_loss(from({1, 0, 0, 1}, 1, 2, 2), from({0.9, 0.2, 0.4, 0.6}, 1, 2, 2), eps);
  const Tensor half(4, 1, 1, 1, 0.5);
  const double two_ln2 = discriminator_loss(half, half, eps);
  const double ln2 = confusion_loss(half, eps);
  o.pass = o.pass && std::abs(bce - hand) < 1e-6 && std::abs(two_ln2 - 2 * std::log(2.0)) < 1e-6 &&
           std::abs(ln2 - std::log(2.0)) < 1e-6;
  o.detail = "200 random 4x4 trials, max |err| " + fmt("%.1e", worst) + "; BCE example " + fmt("%.6f", bce) +
             ", L_D(0.5) " + fmt("%.6f", two_ln2) + ", L_EnT(0.5) " + fmt("%.6f", ln2);
  return o;
}

// 2 ---------------------------------------------------------------------------

Outcome gradient_check() {
  using testing::LossKind;
  Outcome o;
  double worst = 0.0;
  std::string where;
  int groups = 0;
  for (FusionMode m : {FusionMode::kConv, FusionMode::kProduct, FusionMode::kAddition, FusionMode::kNone}) {
    for (bool target_encoder : {false, true}) {
      Network net(testing::tiny_model_config(m), 31);
      net.create_target_encoder();
      testing::jitter_biases(net, 32);
      testing::GradProblem p = testing::make_grad_problem(33);
      p.use_target_encoder = target_encoder;
      for (LossKind kind : {LossKind::kSupervised, LossKind::kConfusion, LossKind::kDiscriminator}) {
        if (target_encoder && kind == LossKind::kSupervised) continue;
        for (ParamGroup g : {ParamGroup::kSourceEncoder, ParamGroup::kTargetEncoder, ParamGroup::kFusion,
                             ParamGroup::kDecoder, ParamGroup::kFlowDecoder, ParamGroup::kDiscriminator}) {
          if (net.parameters(g).empty()) continue;
          const auto r = testing::check_group(net, g, kind, p);
          ++groups;
          if (r.max_rel_error > worst) {
            worst = r.max_rel_error;
            where = std::string(fusion_mode_name(m)) + " " + testing::loss_kind_name(kind) + " " + r.worst;
          }
        }
      }
    }
  }
  o.pass = worst <= 1e-3;
  o.detail = std::to_string(groups) + " (fusion, loss, group) checks, max relative error " + fmt("%.2e", worst);
  if (!o.pass) o.detail += " at " + where;
  return o;
}

// Desk-scale settings shared by criteria 3 to 6 --------------------------------

constexpr int kSeeds = 3;

TrainConfig desk_config(std::uint64_t seed) {
  TrainConfig c;
  c.crop = 48;
  c.batch_size = 8;
  c.epochs = 1000;
  c.max_steps = 600;
  c.model.encoder_widths = {8, 16, 32};
  c.model.decoder_widths = {16, 16, 8};
  c.model.discriminator_widths = {32, 32, 32};
  c.lr = 0.01;
  c.lr_decay = 1.0;
  c.val_every = 0;
  c.seed = seed;
  return c;
}

SyntheticDatasetSpec desk_dataset(std::uint64_t seed, int distractors) {
  SyntheticDatasetSpec s;
  s.n_train_sequences = 20;
  s.n_test_sequences = 5;
  s.sequence.height = 64;
  s.sequence.width = 64;
  s.sequence.length = 8;
  s.sequence.n_static_distractors = distractors;
  s.sequence.seed = seed;
  return s;
}

struct DistractorRun {
  double j = 0.0;
  double fp_iou = 0.0;  // false positives against distractor pixels, pooled
};

DistractorRun score_distractor_run(const Network& net, const SyntheticDataset& d) {
  std::vector<FrameSample> val = flatten_samples(d.test);
  DistractorRun r;
  r.j = evaluate_dataset(net, val).j.mean;
  double inter = 0.0, uni = 0.0;
  for (const SyntheticSequence& seq : d.test) {
    for (std::size_t i = 0; i < seq.samples.size(); ++i) {
      const FrameSample& s = seq.samples[i];
      const Tensor pred = binarize(net.predict(s.image, s.flow), 0.5);
      const auto p = pred.values();
      const auto g = s.mask().values();
      const auto dm = seq.distractor_masks[i].values();
      for (std::size_t k = 0; k < p.size(); ++k) {
        const bool fp = p[k] > 0 && g[k] == 0;
        const bool dd = dm[k] > 0;
        inter += fp && dd;
        uni += fp || dd;
      }
    }
  }
  r.fp_iou = uni > 0 ? inter / uni : 0.0;
  return r;
}

struct DistractorStudy {
  std::vector<DistractorRun> conv_fs, conv_nofs, add_fs, prod_fs;
};

DistractorStudy& distractor_study() {
  static DistractorStudy study = [] {
    DistractorStudy s;
    const SyntheticDataset d = generate_synthetic_dataset(desk_dataset(11, 2));
    TrainData data;
    data.source_train = flatten_samples(d.train);
    data.source_val = flatten_samples(d.test);
    for (int seed = 1; seed <= kSeeds; ++seed) {
      auto run = [&](FusionMode fusion, bool flow_sup) {
        TrainConfig c = desk_config(static_cast<std::uint64_t>(seed));
        c.model.fusion = fusion;
        c.flow_supervision = flow_sup;
        return score_distractor_run(train_supervised(c, data).network, d);
      };
      s.conv_fs.push_back(run(FusionMode::kConv, true));
      s.conv_nofs.push_back(run(FusionMode::kConv, false));
      s.add_fs.push_back(run(FusionMode::kAddition, true));
      s.prod_fs.push_back(run(FusionMode::kProduct, true));
    }
    return s;
  }();
  return study;
}

std::vector<double> js(const std::vector<DistractorRun>& runs) {
  std::vector<double> out;
  for (const auto& r : runs) out.push_back(r.j);
  return out;
}

std::vector<double> fps(const std::vector<DistractorRun>& runs) {
  std::vector<double> out;
  for (const auto& r : runs) out.push_back(r.fp_iou);
  return out;
}

struct DomainStudy {
  std::vector<double> source_j;  // supervised model, source validation
  std::vector<double> frozen_j, shared_j, separated_j;  // target test split
  std::vector<double> separated_acc, shared_acc;
};

DomainStudy& domain_study() {
  static DomainStudy study = [] {
    DomainStudy s;
    SyntheticDatasetSpec src = desk_dataset(21, 0);
    src.name = "source";
    SyntheticDatasetSpec tgt = src;
    tgt.name = "target";
    tgt.sequence.seed = 22;
    tgt.sequence.style = AppearanceStyle::kTarget;
    tgt.sequence.style_strength = 0.5;
    const SyntheticDataset ds = generate_synthetic_dataset(src);
    const SyntheticDataset dt = generate_synthetic_dataset(tgt);
    TrainData data;
    data.source_train = flatten_samples(ds.train);
    data.source_val = flatten_samples(ds.test);
    data.target_train = unlabeled_view(flatten_samples(dt.train));
    data.target_val = unlabeled_view(flatten_samples(dt.test));
    // Labels for scoring only; no training path sees them.
    const std::vector<FrameSample> target_eval = flatten_samples(dt.test);
    EvalOptions target_stream;
    target_stream.stream = Network::Stream::kTarget;

    for (int seed = 1; seed <= kSeeds; ++seed) {
      const TrainConfig base = desk_config(static_cast<std::uint64_t>(seed));
      const TrainResult sup = train_supervised(base, data);
      s.source_j.push_back(evaluate_dataset(sup.network, data.source_val).j.mean);
      s.frozen_j.push_back(evaluate_dataset(sup.network, target_eval).j.mean);

      TrainConfig sep = base;
      sep.regime = Regime::kUdaSeparated;
      sep.max_steps = 0;
      sep.uda_epochs = 16;
      sep.uda_lr = 3e-4;
      sep.uda_disc_lr = 1e-2;
      sep.uda_momentum = 0.0;
      const TrainResult rs = train_uda_separated(sep, sup.network, data);
      s.separated_j.push_back(evaluate_dataset(rs.network, target_eval, target_stream).j.mean);
      s.separated_acc.push_back(rs.heldout_disc_acc);

      TrainConfig sh = base;
      sh.regime = Regime::kUdaShared;
      sh.max_steps = 0;
      sh.epochs = 34;
      sh.lr_decay = 0.97;
      sh.disc_lr = 0.05;
      sh.disc_momentum = 0.0;
      const TrainResult rh = train_uda_shared(sh, data);
      s.shared_j.push_back(evaluate_dataset(rh.network, target_eval).j.mean);
      s.shared_acc.push_back(rh.heldout_disc_acc);
    }
    return s;
  }();
  return study;
}

// 3 ---------------------------------------------------------------------------

Outcome supervised_competence() {
  const DomainStudy& s = domain_study();
  Outcome o;
  for (double j : s.source_j) o.pass = o.pass && j >= 0.80;
  o.detail = "conv fusion, 600 steps: validation J " + join3(s.source_j) + " (need >= 0.80 each)";
  return o;
}

// 4 ---------------------------------------------------------------------------

Outcome flow_supervision_effect() {
  const DistractorStudy& s = distractor_study();
  const double fp_on = mean(fps(s.conv_fs)), fp_off = mean(fps(s.conv_nofs));
  const double j_on = mean(js(s.conv_fs)), j_off = mean(js(s.conv_nofs));
  Outcome o;
  o.pass = fp_on < fp_off && j_on > j_off;
  o.detail = "mean over seeds: distractor FP IoU " + fmt("%.4f", fp_on) + " (on) vs " + fmt("%.4f", fp_off) +
             " (off); J " + fmt("%.4f", j_on) + " vs " + fmt("%.4f", j_off) + "; per seed FP " +
             join3(fps(s.conv_fs)) + " vs " + join3(fps(s.conv_nofs));
  return o;
}

// 5 ---------------------------------------------------------------------------

Outcome fusion_ordering() {
  const DistractorStudy& s = distractor_study();
  const double conv = mean(js(s.conv_fs)), add = mean(js(s.add_fs)), prod = mean(js(s.prod_fs));
  Outcome o;
  o.pass = conv >= add && conv >= prod;
  o.detail = "mean J with flow supervision: conv " + fmt("%.4f", conv) + ", addition " + fmt("%.4f", add) +
             ", product " + fmt("%.4f", prod);
  return o;
}

// 6 ---------------------------------------------------------------------------

Outcome uda_improvement() {
  const DomainStudy& s = domain_study();
  const double frozen = mean(s.frozen_j), shared = mean(s.shared_j), sep = mean(s.separated_j);
  const double acc = mean(s.separated_acc);
  const bool a = shared > frozen, b = sep > frozen, c = shared >= sep, d = acc >= 0.35 && acc <= 0.65;
  Outcome o;
  o.pass = a && b && c && d;
  o.detail = std::string("mean target J: frozen ") + fmt("%.4f", frozen) + ", shared " + fmt("%.4f", shared) +
             ", separated " + fmt("%.4f", sep) + "; held-out D accuracy " + fmt("%.3f", acc) + " [a" +
             (a ? "+" : "-") + " b" + (b ? "+" : "-") + " c" + (c ? "+" : "-") + " d" + (d ? "+" : "-") +
             "]; per seed frozen " + join3(s.frozen_j) + ", shared " + join3(s.shared_j) + ", separated " +
             join3(s.separated_j);
  return o;
}

// 7 ---------------------------------------------------------------------------

Outcome frozen_weight_contracts() {
  testing::TempDir dir("vosda-accept");
  const auto src_spec = testing::tiny_dataset_spec(AppearanceStyle::kSource, 3);
  const auto tgt_spec = testing::tiny_dataset_spec(AppearanceStyle::kTarget, 103);
  materialize_dataset(src_spec, generate_synthetic_dataset(src_spec), dir / "src", false);
  materialize_dataset(tgt_spec, generate_synthetic_dataset(tgt_spec), dir / "tgt", false);
  // Any attempt to decode these fails.
  for (const auto& e : fs::recursive_directory_iterator(dir / "tgt" / "Annotations"))
    if (e.is_regular_file()) std::ofstream(e.path(), std::ios::trunc) << "unreadable";

  TrainConfig sup_cfg = testing::tiny_train_config();
  sup_cfg.source = (dir / "src").string();
  const TrainResult sup = train_supervised(sup_cfg, load_train_data(sup_cfg));

  TrainConfig sep_cfg = testing::tiny_train_config(Regime::kUdaSeparated);
  sep_cfg.source = sup_cfg.source;
  sep_cfg.target = (dir / "tgt").string();
  const TrainData data = load_train_data(sep_cfg);
  TrainOptions verify;
  verify.verify_isolation = true;
  const TrainResult sep = train_uda_separated(sep_cfg, sup.network, data, verify);
  bool frozen = true;
  for (ParamGroup g : {ParamGroup::kSourceEncoder, ParamGroup::kFusion, ParamGroup::kDecoder})
    frozen = frozen && checksum(sep.network, g) == checksum(sup.network, g);

  TrainConfig sh_cfg = sep_cfg;
  sh_cfg.regime = Regime::kUdaShared;
  const TrainResult sh = train_uda_shared(sh_cfg, data, verify);

  Outcome o;
  o.pass = frozen && sep.isolation_checks > 0 && sh.isolation_checks > 0;
  o.detail = std::string("separated: En_S/phi/De checksums ") + (frozen ? "unchanged" : "CHANGED") + ", " +
             std::to_string(sep.isolation_checks) + " per-step checks; shared: " +
             std::to_string(sh.isolation_checks) + " per-sub-step checks; target annotations unreadable";
  return o;
}

// 8 ---------------------------------------------------------------------------

Outcome metric_oracles() {
  Outcome o;
  std::vector<std::string> bad;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  Tensor left(1, 1, 2, 2), top(1, 1, 2, 2);
  left.at(0, 0, 0, 0) = left.at(0, 0, 1, 0) = 1;
  top.at(0, 0, 0, 0) = top.at(0, 0, 0, 1) = 1;
  expect(jaccard(top, left) == 1.0 / 3.0, "2x2 jaccard");
  expect(jaccard(left, left) == 1.0, "identical jaccard");
  expect(jaccard(Tensor(1, 1, 2, 2), Tensor(1, 1, 2, 2)) == 1.0, "empty jaccard");
  Tensor right(1, 1, 2, 2);
  right.at(0, 0, 0, 1) = right.at(0, 0, 1, 1) = 1;
  expect(jaccard(left, right) == 0.0, "disjoint jaccard");
  expect(f_measure(left, left, 1) == 1.0, "identical F");
  expect(f_measure(Tensor(1, 1, 2, 2), left, 1) == 0.0, "empty F");

  // 10x10 square and its one-pixel shift.
  oracle::Mask a{16, 16, std::vector<int>(256)}, b{16, 16, std::vector<int>(256)};
  for (int y = 3; y < 13; ++y)
    for (int x = 3; x < 13; ++x) {
      a.v[static_cast<std::size_t>(y) * 16 + x] = 1;
      b.v[static_cast<std::size_t>(y) * 16 + x + 1] = 1;
    }
  auto tensor = [](const oracle::Mask& m) {
    Tensor t(1, 1, m.h, m.w);
    for (std::size_t i = 0; i < m.v.size(); ++i) t.data()[i] = m.v[i];
    return t;
  };
  double worst_f = std::abs(f_measure(tensor(a), tensor(b), 1) - oracle::f_measure_brute(a, b, 1));

  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> side(1, 16), tol(0, 4), count(0, 3);
    const int h = side(rng), w = side(rng), r = tol(rng);
    oracle::Mask m[2] = {{h, w, std::vector<int>(static_cast<std::size_t>(h) * w)},
                         {h, w, std::vector<int>(static_cast<std::size_t>(h) * w)}};
    for (auto& mask : m) {
      for (int k = count(rng); k > 0; --k) {
        std::uniform_int_distribution<int> ys(0, h - 1), xs(0, w - 1);
        int y0 = ys(rng), y1 = ys(rng), x0 = xs(rng), x1 = xs(rng);
        if (y0 > y1) std::swap(y0, y1);
        if (x0 > x1) std::swap(x0, x1);
        for (int y = y0; y <= y1; ++y)
          for (int x = x0; x <= x1; ++x) mask.v[static_cast<std::size_t>(y) * w + x] = 1;
      }
    }
    const double got = f_measure(tensor(m[0]), tensor(m[1]), r);
    worst_f = std::max(worst_f, std::abs(got - oracle::f_measure_brute(m[0], m[1], r)));
    expect(jaccard(tensor(m[0]), tensor(m[1])) == oracle::iou(m[0], m[1]), "random jaccard");
  }
  expect(worst_f <= 1e-9, "F vs brute force");

  std::vector<FrameScore> frames;
  const double scores[] = {1.0, 1.0, 0.8, 0.8, 0.6, 0.6, 0.4, 0.4};
  for (int i = 0; i < 8; ++i) frames.push_back({"seq", i + 1, scores[i], scores[i]});
  const MetricStats st = j_statistics(frames);
  expect(std::abs(st.mean - 0.7) < 1e-12 && st.recall == 0.75, "8-frame mean/recall");
  expect(std::abs(st.decay - 0.6) < 1e-12, "8-frame decay");

  o.pass = bad.empty();
  o.detail = "J examples exact, F vs brute force max |err| " + fmt("%.1e", worst_f) + " over 301 masks, decay " +
             fmt("%.15g", st.decay);
  for (const auto& s : bad) o.detail += "; FAILED " + s;
  return o;
}

// 9 ---------------------------------------------------------------------------

Outcome format_contracts() {
  testing::TempDir dir("vosda-accept");
  std::vector<std::string> bad;

  const auto bytes = oracle::flo_fixture_bytes();
  std::ofstream(dir / "fixture.flo", std::ios::binary)
      .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  const FlowField fx = read_flo(dir / "fixture.flo");
  if (!(fx.width == 2 && fx.height == 1 && fx.u(0, 0) == 1.5f && fx.v(0, 0) == -2.0f && fx.u(0, 1) == 0.0f &&
        fx.v(0, 1) == 3.25f))
    bad.push_back("fixture values");
  write_flo(fx, dir / "fixture2.flo");
  std::ifstream in(dir / "fixture2.flo", std::ios::binary);
  const std::vector<unsigned char> back{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (back != bytes) bad.push_back("fixture bytes");

  std::mt19937_64 rng(5);
  std::normal_distribution<float> g(0.f, 20.f);
  FlowField f(37, 23);
  for (float& v : f.uv) v = g(rng);
  write_flo(f, dir / "r.flo");
  if (!(read_flo(dir / "r.flo") == f)) bad.push_back("random flo round trip");

  const TrainData data = testing::tiny_train_data();
  const TrainConfig cfg = testing::tiny_train_config();
  const TrainResult a = train_supervised(cfg, data);
  const TrainResult b = train_supervised(cfg, data);
  if (a.history.to_csv() != b.history.to_csv()) bad.push_back("supervised history rerun");
  TrainConfig sh = testing::tiny_train_config(Regime::kUdaShared);
  if (train_uda_shared(sh, data).history.to_csv() != train_uda_shared(sh, data).history.to_csv())
    bad.push_back("shared history rerun");

  save_checkpoint(a.network, cfg, a.state, dir / "m.ckpt");
  const Checkpoint ck = load_checkpoint(dir / "m.ckpt");
  const auto pa = a.network.all_parameters();
  const auto pb = ck.network.all_parameters();
  bool same = pa.size() == pb.size();
  for (std::size_t i = 0; same && i < pa.size(); ++i) same = pa[i]->name == pb[i]->name && pa[i]->value == pb[i]->value;
  for (const auto& [name, opt] : a.state.optimizers)
    same = same && ck.state.optimizers.count(name) && ck.state.optimizers.at(name).state() == opt.state();
  if (!same) bad.push_back("checkpoint values");

  Outcome o;
  o.pass = bad.empty();
  o.detail = "28-byte fixture, random 37x23 field, checkpoint of " + std::to_string(pa.size()) +
             " tensors, rerun history CSVs (supervised and shared)";
  for (const auto& s : bad) o.detail += "; FAILED " + s;
  return o;
}

// 10 --------------------------------------------------------------------------

Outcome resolution_closure() {
  const ModelConfig config;  // full-size network
  const Network net(config, 1);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Outcome o;
  std::string sizes;
  for (auto [h, w] : {std::pair{384, 384}, {97, 113}, {480, 854}}) {
    Tensor img(1, 3, h, w), flow(1, 2, h, w);
    for (double& v : img.values()) v = u(rng);
    for (double& v : flow.values()) v = 10 * u(rng) - 5;
    const Tensor p = net.predict(img, flow);
    const bool ok = p.n() == 1 && p.c() == 1 && p.h() == h && p.w() == w;
    o.pass = o.pass && ok;
    sizes += (sizes.empty() ? "" : ", ") + std::to_string(h) + "x" + std::to_string(w) + " -> " +
             std::to_string(p.h()) + "x" + std::to_string(p.w()) + "x" + std::to_string(p.c());
  }
  o.detail = sizes;
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"loss oracles", loss_oracles},
      {"gradient correctness", gradient_check},
      {"supervised competence", supervised_competence},
      {"flow-supervision effect", flow_supervision_effect},
      {"fusion ablation ordering", fusion_ordering},
      {"UDA improvement", uda_improvement},
      {"frozen-weight contracts", frozen_weight_contracts},
      {"metric oracles", metric_oracles},
      {"format contracts", format_contracts},
      {"resolution closure", resolution_closure},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s: %s (%.0fs)\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
