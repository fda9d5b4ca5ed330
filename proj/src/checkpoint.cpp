#include "vosda/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "vosda/error.hpp"
#include "vosda/hash.hpp"

namespace vosda {

namespace {

constexpr char kMagic[8] = {'V', 'O', 'S', 'D', 'A', 'C', 'K', '1'};

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

struct Entry {
  std::string name;
  std::vector<int> shape;
  const std::vector<double>* values;
};

[[noreturn]] void corrupt(const std::filesystem::path& path, const std::string& why) {
  throw Error(ErrorCode::kCorruptCheckpoint, path.string() + ": " + why);
}

}  // namespace

void save_checkpoint(const Network& network, const TrainConfig& config, const TrainingState& state,
                     const std::filesystem::path& path) {
  std::vector<Entry> entries;
  for (const Parameter* p : network.all_parameters()) entries.push_back({p->name, p->shape, &p->value});
  for (const auto& [opt_name, opt] : state.optimizers)
    for (const auto& [param, velocity] : opt.state())
      entries.push_back({"opt." + opt_name + "." + param,
                         {static_cast<int>(velocity.size())}, &velocity});

  nlohmann::ordered_json header;
  header["format"] = "vosda-checkpoint";
  header["version"] = 1;
  header["fingerprint"] = network.config().fingerprint();
  header["config"] = config.to_text();
  header["epoch"] = state.epoch;
  header["step"] = state.step;
  header["has_target_encoder"] = network.en_t.has_value();
  auto table = nlohmann::ordered_json::array();
  std::uint64_t offset = 0;
  for (const auto& e : entries) {
    table.push_back({{"name", e.name},
                     {"shape", e.shape},
                     {"dtype", "f64"},
                     {"offset", offset},
                     {"count", e.values->size()}});
    offset += e.values->size();
  }
  header["tensors"] = table;
  const std::string text = header.dump();

  std::vector<unsigned char> bytes(std::begin(kMagic), std::end(kMagic));
  put_u64(bytes, text.size());
  bytes.insert(bytes.end(), text.begin(), text.end());
  for (const auto& e : entries)
    for (double v : *e.values) put_u64(bytes, std::bit_cast<std::uint64_t>(v));
  Fnv1a h;
  h.update(bytes.data(), bytes.size());
  put_u64(bytes, h.digest());

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIoFailure, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot rename onto " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingCheckpoint, path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kMagic, 8) != 0) corrupt(path, "bad magic");
  Fnv1a h;
  h.update(bytes.data(), bytes.size() - 8);
  if (h.digest() != get_u64(bytes.data() + bytes.size() - 8)) corrupt(path, "checksum mismatch");
  const std::uint64_t header_len = get_u64(bytes.data() + 8);
  if (16 + header_len + 8 > bytes.size()) corrupt(path, "header overruns the file");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16,
                                   bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    corrupt(path, std::string("header: ") + e.what());
  }

  Checkpoint ck;
  try {
    ck.config = TrainConfig::from_key_values(
        KeyValueFile::parse(header.at("config").get<std::string>(), path.string()));
    ck.state.epoch = header.at("epoch").get<int>();
    ck.state.step = header.at("step").get<long>();
  } catch (const nlohmann::json::exception& e) {
    corrupt(path, std::string("header: ") + e.what());
  }
  const ModelConfig model = ck.config.model_config();
  const std::string fingerprint = header.value("fingerprint", "");
  if (fingerprint != model.fingerprint()) corrupt(path, "fingerprint does not match stored config");
  if (expected && expected->fingerprint() != fingerprint) {
    throw Error(ErrorCode::kFingerprintMismatch,
                path.string() + " was trained with a different architecture (fusion " +
                    fusion_mode_name(model.fusion) + ", expected " +
                    fusion_mode_name(expected->fusion) + ")");
  }

  ck.network = Network(model, 0);
  if (header.value("has_target_encoder", false)) ck.network.create_target_encoder();
  std::map<std::string, Parameter*> by_name;
  for (Parameter* p : ck.network.all_parameters()) by_name[p->name] = p;

  const std::size_t payload = 16 + header_len;
  const std::size_t payload_doubles = (bytes.size() - 8 - payload) / 8;
  std::size_t restored = 0;
  for (const auto& t : header.at("tensors")) {
    const auto name = t.at("name").get<std::string>();
    const auto offset = t.at("offset").get<std::uint64_t>();
    const auto count = t.at("count").get<std::uint64_t>();
    if (t.value("dtype", "") != "f64") corrupt(path, name + " has an unsupported dtype");
    if (offset + count > payload_doubles) corrupt(path, name + " overruns the payload");
    std::vector<double> values(count);
    for (std::uint64_t i = 0; i < count; ++i)
      values[i] = std::bit_cast<double>(get_u64(bytes.data() + payload + 8 * (offset + i)));

    if (name.rfind("opt.", 0) == 0) {
      const auto dot = name.find('.', 4);
      if (dot == std::string::npos) corrupt(path, "bad optimizer entry " + name);
      ck.state.optimizers[name.substr(4, dot - 4)].state()[name.substr(dot + 1)] = std::move(values);
      continue;
    }
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw Error(ErrorCode::kFingerprintMismatch, path.string() + ": unexpected tensor " + name);
    }
    if (t.at("shape").get<std::vector<int>>() != it->second->shape ||
        values.size() != it->second->value.size()) {
      throw Error(ErrorCode::kFingerprintMismatch, path.string() + ": shape mismatch for " + name);
    }
    it->second->value = std::move(values);
    ++restored;
  }
  if (restored != by_name.size()) corrupt(path, "missing parameter tensors");
  return ck;
}

}  // namespace vosda
