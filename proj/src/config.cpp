#include "vosda/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "vosda/error.hpp"

namespace vosda {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw Error(ErrorCode::kConfigError,
              "key '" + key + "': expected " + want + ", got '" + value + "'");
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "an integer");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const auto out = std::stoull(v, &used);
      if (used == v.size()) return out;
    }
  } catch (const std::exception&) {
  }
  bad_value(key, v, "a non-negative integer");
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "a number");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "true/false");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(key, trim(item)));
  if (out.empty()) bad_value(key, v, "a comma-separated integer list");
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string fmt(bool v) { return v ? "true" : "false"; }

struct Field {
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string& key, const std::string&)> set;
};

#define VOSDA_INT(name, member)                                                         \
  {name, {[](const TrainConfig& c) { return std::to_string(c.member); },                \
          [](TrainConfig& c, const std::string& k, const std::string& v) { c.member = to_int(k, v); }}}
#define VOSDA_DOUBLE(name, member)                                                          \
  {name, {[](const TrainConfig& c) { return fmt(c.member); },                               \
          [](TrainConfig& c, const std::string& k, const std::string& v) { c.member = to_double(k, v); }}}
#define VOSDA_BOOL(name, member)                                                          \
  {name, {[](const TrainConfig& c) { return fmt(c.member); },                             \
          [](TrainConfig& c, const std::string& k, const std::string& v) { c.member = to_bool(k, v); }}}
#define VOSDA_STRING(name, member)                                             \
  {name, {[](const TrainConfig& c) { return c.member; },                       \
          [](TrainConfig& c, const std::string&, const std::string& v) { c.member = v; }}}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"regime",
       {[](const TrainConfig& c) { return std::string(regime_name(c.regime)); },
        [](TrainConfig& c, const std::string&, const std::string& v) { c.regime = parse_regime(v); }}},
      VOSDA_INT("epochs", epochs),
      VOSDA_INT("max_steps", max_steps),
      VOSDA_INT("batch_size", batch_size),
      VOSDA_DOUBLE("lr", lr),
      VOSDA_DOUBLE("momentum", momentum),
      VOSDA_DOUBLE("weight_decay", weight_decay),
      VOSDA_DOUBLE("lr_decay", lr_decay),
      VOSDA_DOUBLE("disc_lr", disc_lr),
      VOSDA_DOUBLE("disc_momentum", disc_momentum),
      VOSDA_INT("uda_epochs", uda_epochs),
      VOSDA_DOUBLE("uda_lr", uda_lr),
      VOSDA_DOUBLE("uda_momentum", uda_momentum),
      VOSDA_DOUBLE("uda_disc_lr", uda_disc_lr),
      VOSDA_INT("m_iters", m_iters),
      VOSDA_INT("n_iters", n_iters),
      VOSDA_DOUBLE("alpha1", loss.alpha1),
      VOSDA_DOUBLE("alpha2", loss.alpha2),
      VOSDA_DOUBLE("beta1", loss.beta1),
      VOSDA_DOUBLE("beta2", loss.beta2),
      VOSDA_DOUBLE("lambda2", loss.lambda2),
      VOSDA_DOUBLE("eps", loss.eps),
      VOSDA_BOOL("flow_supervision", flow_supervision),
      VOSDA_INT("crop", crop),
      VOSDA_BOOL("augment_flip", augment_flip),
      VOSDA_BOOL("augment_jitter", augment_jitter),
      {"fusion",
       {[](const TrainConfig& c) { return std::string(fusion_mode_name(c.model.fusion)); },
        [](TrainConfig& c, const std::string&, const std::string& v) {
          c.model.fusion = parse_fusion_mode(v);
        }}},
      {"encoder_widths",
       {[](const TrainConfig& c) { return fmt(c.model.encoder_widths); },
        [](TrainConfig& c, const std::string& k, const std::string& v) {
          c.model.encoder_widths = to_int_list(k, v);
        }}},
      {"decoder_widths",
       {[](const TrainConfig& c) { return fmt(c.model.decoder_widths); },
        [](TrainConfig& c, const std::string& k, const std::string& v) {
          c.model.decoder_widths = to_int_list(k, v);
        }}},
      {"disc_widths",
       {[](const TrainConfig& c) { return fmt(c.model.discriminator_widths); },
        [](TrainConfig& c, const std::string& k, const std::string& v) {
          c.model.discriminator_widths = to_int_list(k, v);
        }}},
      VOSDA_DOUBLE("flow_scale", flow_scale),
      {"seed",
       {[](const TrainConfig& c) { return std::to_string(c.seed); },
        [](TrainConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); }}},
      VOSDA_BOOL("deterministic", deterministic),
      VOSDA_STRING("source", source),
      VOSDA_STRING("target", target),
      VOSDA_STRING("source_val_split", source_val_split),
      VOSDA_STRING("target_val_split", target_val_split),
      VOSDA_STRING("warm_start", warm_start),
      VOSDA_INT("val_every", val_every),
      VOSDA_DOUBLE("threshold", threshold),
      VOSDA_INT("tol_radius", tol_radius),
  };
  return table;
}

#undef VOSDA_INT
#undef VOSDA_DOUBLE
#undef VOSDA_BOOL
#undef VOSDA_STRING

const Field& field(const std::string& key) {
  for (const auto& [name, f] : fields())
    if (name == key) return f;
  throw Error(ErrorCode::kConfigError, "unknown key '" + key + "'");
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigError,
                  origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::kConfigError, origin + ":" + std::to_string(line_no) + ": empty key");
    }
    if (kv.has(key)) {
      throw Error(ErrorCode::kConfigError,
                  origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    kv.values_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const std::string& KeyValueFile::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::kConfigError, "missing key '" + key + "'");
  return it->second;
}

const char* regime_name(Regime regime) {
  switch (regime) {
    case Regime::kSupervised: return "supervised";
    case Regime::kUdaShared: return "shared";
    case Regime::kUdaSeparated: return "separated";
  }
  return "?";
}

Regime parse_regime(const std::string& text) {
  if (text == "supervised") return Regime::kSupervised;
  if (text == "shared" || text == "uda_shared") return Regime::kUdaShared;
  if (text == "separated" || text == "uda_separated") return Regime::kUdaSeparated;
  throw Error(ErrorCode::kConfigError, "key 'regime': unknown regime '" + text + "'");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfigError, msg); };
  if (epochs < 1) fail("key 'epochs': must be >= 1");
  if (max_steps < 0) fail("key 'max_steps': must be >= 0");
  if (batch_size < 1) fail("key 'batch_size': must be >= 1");
  if (!(lr > 0.0)) fail("key 'lr': must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) fail("key 'momentum': must be in [0, 1)");
  if (disc_momentum < 0.0 || disc_momentum >= 1.0) fail("key 'disc_momentum': must be in [0, 1)");
  if (uda_momentum < 0.0 || uda_momentum >= 1.0) fail("key 'uda_momentum': must be in [0, 1)");
  if (weight_decay < 0.0) fail("key 'weight_decay': must be >= 0");
  if (!(lr_decay > 0.0)) fail("key 'lr_decay': must be > 0");
  if (uda_epochs < 1) fail("key 'uda_epochs': must be >= 1");
  if (!(uda_lr > 0.0)) fail("key 'uda_lr': must be > 0");
  if (uda_disc_lr < 0.0) fail("key 'uda_disc_lr': must be >= 0");
  if (regime == Regime::kUdaSeparated && (m_iters < 1 || n_iters < 1)) {
    fail("keys 'm_iters'/'n_iters': must be >= 1 in the separated regime");
  }
  if (crop < 1 || crop % model.stride() != 0) {
    fail("key 'crop': must be a positive multiple of the encoder stride " +
         std::to_string(model.stride()));
  }
  if (!(threshold > 0.0 && threshold < 1.0)) fail("key 'threshold': must be in (0, 1)");
  if (tol_radius < 0) fail("key 'tol_radius': must be >= 0");
  if (val_every < 0) fail("key 'val_every': must be >= 0");
  if (flow_supervision && !model.has_flow_branch()) {
    fail("key 'flow_supervision': needs a flow branch (fusion != none)");
  }
  if (flow_scale < 0.0) fail("key 'flow_scale': must be >= 0 (0 = crop / 20)");
  loss.validate();
  model_config().validate();
}

ModelConfig TrainConfig::model_config() const {
  ModelConfig m = model;
  m.flow_scale = flow_scale > 0.0 ? flow_scale : crop / 20.0;
  return m;
}

TrainConfig TrainConfig::from_key_values(const KeyValueFile& kv) {
  return from_key_values(kv, TrainConfig{});
}

TrainConfig TrainConfig::from_key_values(const KeyValueFile& kv, const TrainConfig& base) {
  TrainConfig c = base;
  for (const auto& [key, value] : kv.entries()) c.set(key, value);
  return c;
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  const Field& f = field(key);
  try {
    f.set(*this, key, trim(value));
  } catch (const Error& e) {
    if (e.message().rfind("key '", 0) == 0) throw;
    throw Error(ErrorCode::kConfigError, "key '" + key + "': " + e.message());
  }
}

std::string TrainConfig::get(const std::string& key) const { return field(key).get(*this); }

const std::vector<std::string>& TrainConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : fields()) out.push_back(name);
    return out;
  }();
  return names;
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  for (const auto& [name, f] : fields()) os << name << " = " << f.get(*this) << '\n';
  return os.str();
}

SyntheticDatasetSpec synthetic_spec_from_key_values(const KeyValueFile& kv) {
  SyntheticDatasetSpec spec;
  SyntheticSpec& s = spec.sequence;
  for (const auto& [key, v] : kv.entries()) {
    try {
      if (key == "name") spec.name = v;
      else if (key == "train_sequences") spec.n_train_sequences = to_int(key, v);
      else if (key == "test_sequences") spec.n_test_sequences = to_int(key, v);
      else if (key == "height") s.height = to_int(key, v);
      else if (key == "width") s.width = to_int(key, v);
      else if (key == "moving_objects") s.n_moving_objects = to_int(key, v);
      else if (key == "static_distractors") s.n_static_distractors = to_int(key, v);
      else if (key == "min_speed") s.min_speed = to_double(key, v);
      else if (key == "max_speed") s.max_speed = to_double(key, v);
      else if (key == "max_rotation") s.max_rotation = to_double(key, v);
      else if (key == "min_radius") s.min_radius = to_double(key, v);
      else if (key == "max_radius") s.max_radius = to_double(key, v);
      else if (key == "style") s.style = parse_style(v);
      else if (key == "style_strength") s.style_strength = to_double(key, v);
      else if (key == "length") s.length = to_int(key, v);
      else if (key == "seed") s.seed = to_u64(key, v);
      else throw Error(ErrorCode::kSpecInvalid, "unknown key '" + key + "'");
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kSpecInvalid) throw;
      throw Error(ErrorCode::kSpecInvalid, e.what());
    }
  }
  spec.validate();
  return spec;
}

std::string synthetic_spec_to_text(const SyntheticDatasetSpec& spec) {
  const SyntheticSpec& s = spec.sequence;
  std::ostringstream os;
  os << "name = " << spec.name << '\n'
     << "train_sequences = " << spec.n_train_sequences << '\n'
     << "test_sequences = " << spec.n_test_sequences << '\n'
     << "height = " << s.height << '\n'
     << "width = " << s.width << '\n'
     << "moving_objects = " << s.n_moving_objects << '\n'
     << "static_distractors = " << s.n_static_distractors << '\n'
     << "min_speed = " << fmt(s.min_speed) << '\n'
     << "max_speed = " << fmt(s.max_speed) << '\n'
     << "max_rotation = " << fmt(s.max_rotation) << '\n'
     << "min_radius = " << fmt(s.min_radius) << '\n'
     << "max_radius = " << fmt(s.max_radius) << '\n'
     << "style = " << style_name(s.style) << '\n'
     << "style_strength = " << fmt(s.style_strength) << '\n'
     << "length = " << s.length << '\n'
     << "seed = " << s.seed << '\n';
  return os.str();
}

}  // namespace vosda
