#include "vosda/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "vosda/error.hpp"
#include "vosda/hash.hpp"

namespace vosda {

namespace {

using Color = std::array<double, 3>;

struct StyleTraits {
  Color background;
  double background_amplitude;
  double background_frequency;
  std::vector<Color> palette;
  double texture_amplitude;
  double texture_frequency;
  bool rectangles;
};

StyleTraits pure_traits(AppearanceStyle style) {
  if (style == AppearanceStyle::kSource) {
    return {{0.22, 0.32, 0.45},
            0.08,
            0.12,
            {{0.85, 0.30, 0.20}, {0.90, 0.55, 0.15}, {0.80, 0.20, 0.45}, {0.95, 0.75, 0.30}},
            0.12,
            0.7,
            false};
  }
  return {{0.58, 0.52, 0.36},
          0.16,
          0.55,
          {{0.15, 0.70, 0.55}, {0.25, 0.55, 0.85}, {0.45, 0.85, 0.35}, {0.10, 0.45, 0.40}},
          0.14,
          0.9,
          true};
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

// Target traits blended towards the source ones; strength 1 is the pure
// target style. Shapes switch to rectangles from strength 0.5 on.
StyleTraits traits_for(AppearanceStyle style, double strength) {
  const StyleTraits src = pure_traits(AppearanceStyle::kSource);
  if (style == AppearanceStyle::kSource) return src;
  StyleTraits st = pure_traits(AppearanceStyle::kTarget);
  for (int k = 0; k < 3; ++k) st.background[k] = lerp(src.background[k], st.background[k], strength);
  for (std::size_t i = 0; i < st.palette.size(); ++i)
    for (int k = 0; k < 3; ++k) st.palette[i][k] = lerp(src.palette[i][k], st.palette[i][k], strength);
  st.background_amplitude = lerp(src.background_amplitude, st.background_amplitude, strength);
  st.background_frequency = lerp(src.background_frequency, st.background_frequency, strength);
  st.texture_amplitude = lerp(src.texture_amplitude, st.texture_amplitude, strength);
  st.texture_frequency = lerp(src.texture_frequency, st.texture_frequency, strength);
  st.rectangles = strength >= 0.5;
  return st;
}

struct Object {
  double cx = 0.0;
  double cy = 0.0;
  double angle = 0.0;
  double rx = 1.0;
  double ry = 1.0;
  ObjectMotion motion;
  Color color{};
  double phase = 0.0;
  bool moving = false;

  double bounding_radius() const { return std::max(rx, ry); }
  double center_x(int t) const { return cx + motion.vx * t; }
  double center_y(int t) const { return cy + motion.vy * t; }
  double angle_at(int t) const { return angle + motion.omega * t; }
};

// Object-local coordinates of pixel (x, y) at frame t.
void to_local(const Object& o, int t, double x, double y, double& lx, double& ly) {
  const double a = o.angle_at(t);
  const double dx = x - o.center_x(t);
  const double dy = y - o.center_y(t);
  const double c = std::cos(a);
  const double s = std::sin(a);
  lx = c * dx + s * dy;
  ly = -s * dx + c * dy;
}

bool contains(const Object& o, const StyleTraits& st, double lx, double ly) {
  if (st.rectangles) return std::abs(lx) <= o.rx && std::abs(ly) <= o.ry;
  const double ex = lx / o.rx;
  const double ey = ly / o.ry;
  return ex * ex + ey * ey <= 1.0;
}

Color texture(const Object& o, const StyleTraits& st, double lx, double ly) {
  const double f = st.texture_frequency;
  const double pattern = st.rectangles ? std::sin(f * lx + o.phase) * std::sin(f * ly)
                                       : std::sin(f * lx + o.phase) * std::cos(0.5 * f * ly);
  Color c;
  for (int k = 0; k < 3; ++k) c[k] = o.color[k] + st.texture_amplitude * pattern;
  return c;
}

Color background(const StyleTraits& st, double phase_x, double phase_y, int x, int y) {
  const double f = st.background_frequency;
  const double pattern = std::sin(f * x + phase_x) * std::cos(f * 0.8 * y + phase_y) +
                         0.5 * std::sin(f * 0.37 * (x + y) + phase_y);
  Color c;
  for (int k = 0; k < 3; ++k) c[k] = st.background[k] + st.background_amplitude * pattern;
  return c;
}

// Places an object so its whole trajectory stays on the canvas.
bool place(Object& o, const SyntheticSpec& spec, std::mt19937_64& rng) {
  const double r = o.bounding_radius();
  const int last = spec.length - 1;
  const double min_x = r - std::min(0.0, o.motion.vx * last);
  const double max_x = spec.width - 1 - r - std::max(0.0, o.motion.vx * last);
  const double min_y = r - std::min(0.0, o.motion.vy * last);
  const double max_y = spec.height - 1 - r - std::max(0.0, o.motion.vy * last);
  if (min_x > max_x || min_y > max_y) return false;
  o.cx = std::uniform_real_distribution<double>(min_x, max_x)(rng);
  o.cy = std::uniform_real_distribution<double>(min_y, max_y)(rng);
  return true;
}

Tensor make_image_tensor(int h, int w) { return Tensor(1, 3, h, w); }

}  // namespace

const char* style_name(AppearanceStyle style) {
  return style == AppearanceStyle::kSource ? "source" : "target";
}

AppearanceStyle parse_style(const std::string& text) {
  if (text == "source") return AppearanceStyle::kSource;
  if (text == "target") return AppearanceStyle::kTarget;
  throw Error(ErrorCode::kSpecInvalid, "unknown style '" + text + "'");
}

void SyntheticSpec::validate() const {
  if (height < 4 || width < 4) throw Error(ErrorCode::kSpecInvalid, "canvas must be at least 4x4");
  if (n_moving_objects < 1) throw Error(ErrorCode::kSpecInvalid, "need >= 1 moving object");
  if (n_static_distractors < 0) throw Error(ErrorCode::kSpecInvalid, "negative distractor count");
  if (length < 2) throw Error(ErrorCode::kSpecInvalid, "sequence length must be >= 2");
  if (min_speed < 0.0 || max_speed < min_speed) {
    throw Error(ErrorCode::kSpecInvalid, "speed range must satisfy 0 <= min <= max");
  }
  if (max_rotation < 0.0) throw Error(ErrorCode::kSpecInvalid, "max_rotation must be >= 0");
  if (!(style_strength >= 0.0 && style_strength <= 1.0))
    throw Error(ErrorCode::kSpecInvalid, "style_strength must lie in [0, 1]");
  if (min_radius <= 0.0 || max_radius < min_radius) {
    throw Error(ErrorCode::kSpecInvalid, "radius range must satisfy 0 < min <= max");
  }
  if (2.0 * max_radius + 1.0 > std::min(height, width)) {
    throw Error(ErrorCode::kSpecInvalid, "objects of radius " + std::to_string(max_radius) +
                                             " cannot fit a " + std::to_string(height) + "x" +
                                             std::to_string(width) + " canvas");
  }
  if (!motions.empty() && static_cast<int>(motions.size()) != n_moving_objects) {
    throw Error(ErrorCode::kSpecInvalid, "explicit motions must cover every moving object");
  }
}

SyntheticSequence generate_synthetic_sequence(const SyntheticSpec& spec) {
  spec.validate();
  const StyleTraits st = traits_for(spec.style, spec.style_strength);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;

  const double bg_phase_x = unit(rng) * two_pi;
  const double bg_phase_y = unit(rng) * two_pi;

  auto draw_object = [&](bool moving_slot, int index) {
    Object o;
    o.rx = spec.min_radius + unit(rng) * (spec.max_radius - spec.min_radius);
    o.ry = spec.min_radius + unit(rng) * (spec.max_radius - spec.min_radius);
    o.angle = unit(rng) * two_pi;
    o.color = st.palette[static_cast<std::size_t>(unit(rng) * st.palette.size()) %
                         st.palette.size()];
    for (double& c : o.color) c = std::clamp(c + (unit(rng) - 0.5) * 0.1, 0.0, 1.0);
    o.phase = unit(rng) * two_pi;
    if (moving_slot) {
      if (!spec.motions.empty()) {
        o.motion = spec.motions[static_cast<std::size_t>(index)];
      } else {
        const double speed = spec.min_speed + unit(rng) * (spec.max_speed - spec.min_speed);
        const double heading = unit(rng) * two_pi;
        o.motion.vx = speed * std::cos(heading);
        o.motion.vy = speed * std::sin(heading);
        o.motion.omega = (2.0 * unit(rng) - 1.0) * spec.max_rotation;
      }
      o.moving = o.motion.vx != 0.0 || o.motion.vy != 0.0 || o.motion.omega != 0.0;
    }
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) placed = place(o, spec, rng);
    if (!placed) {
      throw Error(ErrorCode::kSpecInvalid, "object trajectory cannot fit the canvas over " +
                                               std::to_string(spec.length) + " frames");
    }
    return o;
  };

  // Draw order is paint order: distractors first, moving objects on top.
  std::vector<Object> objects;
  for (int i = 0; i < spec.n_static_distractors; ++i) objects.push_back(draw_object(false, i));
  for (int i = 0; i < spec.n_moving_objects; ++i) objects.push_back(draw_object(true, i));

  const int h = spec.height;
  const int w = spec.width;
  auto render = [&](int t, Tensor& image, Tensor& mask, Tensor* flow, Tensor* distractor) {
    image = make_image_tensor(h, w);
    mask = Tensor(1, 1, h, w);
    if (distractor) *distractor = Tensor(1, 1, h, w);
    if (flow) *flow = Tensor(1, 2, h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        Color c = background(st, bg_phase_x, bg_phase_y, x, y);
        double mask_value = 0.0;
        bool static_on_top = false;
        double fu = 0.0;
        double fv = 0.0;
        for (const Object& o : objects) {
          double lx = 0.0;
          double ly = 0.0;
          to_local(o, t, x, y, lx, ly);
          if (!contains(o, st, lx, ly)) continue;
          c = texture(o, st, lx, ly);
          mask_value = o.moving ? 1.0 : 0.0;
          static_on_top = !o.moving;
          fu = 0.0;
          fv = 0.0;
          if (o.moving && flow) {
            // Where this object point sat at t-1.
            const double a = o.angle_at(t - 1);
            const double px = o.center_x(t - 1) + std::cos(a) * lx - std::sin(a) * ly;
            const double py = o.center_y(t - 1) + std::sin(a) * lx + std::cos(a) * ly;
            fu = x - px;
            fv = y - py;
          }
        }
        for (int k = 0; k < 3; ++k) image.at(0, k, y, x) = std::clamp(c[k], 0.0, 1.0);
        mask.at(0, 0, y, x) = mask_value;
        if (distractor) distractor->at(0, 0, y, x) = static_on_top ? 1.0 : 0.0;
        if (flow) {
          flow->at(0, 0, y, x) = fu;
          flow->at(0, 1, y, x) = fv;
        }
      }
    }
  };

  SyntheticSequence seq;
  seq.id = spec.sequence_id;
  render(0, seq.anchor_image, seq.anchor_mask, nullptr, nullptr);
  for (int t = 1; t < spec.length; ++t) {
    FrameSample s;
    Tensor mask;
    Tensor distractor;
    render(t, s.image, mask, &s.flow, &distractor);
    seq.distractor_masks.push_back(std::move(distractor));
    s.set_mask(std::move(mask));
    s.sequence_id = spec.sequence_id;
    s.frame_index = t;
    s.domain = spec.style == AppearanceStyle::kSource ? Domain::kSource : Domain::kTarget;
    seq.samples.push_back(std::move(s));
  }
  return seq;
}

void SyntheticDatasetSpec::validate() const {
  sequence.validate();
  if (n_train_sequences < 0 || n_test_sequences < 0 ||
      n_train_sequences + n_test_sequences == 0) {
    throw Error(ErrorCode::kSpecInvalid, "dataset needs at least one sequence");
  }
}

std::string SyntheticDatasetSpec::hash() const {
  std::ostringstream os;
  os.precision(17);
  const SyntheticSpec& s = sequence;
  os << name << ';' << n_train_sequences << ';' << n_test_sequences << ';' << s.height << ';'
     << s.width << ';' << s.n_moving_objects << ';' << s.n_static_distractors << ';'
     << s.min_speed << ';' << s.max_speed << ';' << s.max_rotation << ';' << s.min_radius << ';'
     << s.max_radius << ';' << style_name(s.style) << ';' << s.style_strength << ';' << s.length << ';'
     << s.seed;
  for (const auto& m : s.motions) os << ';' << m.vx << ',' << m.vy << ',' << m.omega;
  Fnv1a h;
  h.update(os.str());
  return h.hex();
}

SyntheticDataset generate_synthetic_dataset(const SyntheticDatasetSpec& spec) {
  spec.validate();
  SyntheticDataset out;
  const int total = spec.n_train_sequences + spec.n_test_sequences;
  for (int i = 0; i < total; ++i) {
    SyntheticSpec s = spec.sequence;
    s.seed = spec.sequence.seed * 1000003ULL + static_cast<std::uint64_t>(i) * 7919ULL + 17ULL;
    std::ostringstream id;
    id << spec.name << '-' << (i < spec.n_train_sequences ? "train" : "test") << '-';
    id.width(3);
    id.fill('0');
    id << (i < spec.n_train_sequences ? i : i - spec.n_train_sequences);
    s.sequence_id = id.str();
    auto seq = generate_synthetic_sequence(s);
    (i < spec.n_train_sequences ? out.train : out.test).push_back(std::move(seq));
  }
  return out;
}

std::vector<FrameSample> flatten_samples(const std::vector<SyntheticSequence>& sequences) {
  std::vector<FrameSample> out;
  for (const auto& seq : sequences)
    out.insert(out.end(), seq.samples.begin(), seq.samples.end());
  return out;
}

}  // namespace vosda
