#include "vosda/flo.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "vosda/error.hpp"

namespace vosda {

namespace {

template <typename T>
T load_le(const unsigned char* p) {
  static_assert(sizeof(T) == 4);
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) |
                       (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<T>(bits);
}

template <typename T>
void store_le(T value, unsigned char* p) {
  static_assert(sizeof(T) == 4);
  const auto bits = std::bit_cast<std::uint32_t>(value);
  p[0] = static_cast<unsigned char>(bits & 0xff);
  p[1] = static_cast<unsigned char>((bits >> 8) & 0xff);
  p[2] = static_cast<unsigned char>((bits >> 16) & 0xff);
  p[3] = static_cast<unsigned char>((bits >> 24) & 0xff);
}

}  // namespace

Tensor FlowField::to_tensor() const {
  Tensor t(1, 2, height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      t.at(0, 0, y, x) = u(y, x);
      t.at(0, 1, y, x) = v(y, x);
    }
  return t;
}

FlowField FlowField::from_tensor(const Tensor& t) {
  if (t.n() != 1 || t.c() != 2) {
    throw Error(ErrorCode::kShapeError, "flow tensor must be [1,2,H,W], got " + t.shape_string());
  }
  FlowField f(t.w(), t.h());
  for (int y = 0; y < t.h(); ++y)
    for (int x = 0; x < t.w(); ++x) {
      f.u(y, x) = static_cast<float>(t.at(0, 0, y, x));
      f.v(y, x) = static_cast<float>(t.at(0, 1, y, x));
    }
  return f;
}

FlowField read_flo(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 4) {
    throw Error(ErrorCode::kTruncatedFile, path.string() + " shorter than the magic number");
  }
  const float magic = load_le<float>(bytes.data());
  if (magic != kFloMagic) {
    throw Error(ErrorCode::kMagicMismatch, path.string() + " does not start with 202021.25");
  }
  if (bytes.size() < 12) throw Error(ErrorCode::kTruncatedFile, path.string() + " header");
  const auto width = load_le<std::int32_t>(bytes.data() + 4);
  const auto height = load_le<std::int32_t>(bytes.data() + 8);
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::kTruncatedFile, path.string() + " has negative dimensions");
  }
  const std::uint64_t expected = 12 + 8ULL * static_cast<std::uint64_t>(width) *
                                          static_cast<std::uint64_t>(height);
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kTruncatedFile, path.string() + ": " + std::to_string(bytes.size()) +
                                               " bytes, expected " + std::to_string(expected));
  }
  FlowField flow(width, height);
  const unsigned char* p = bytes.data() + 12;
  for (std::size_t i = 0; i < flow.uv.size(); ++i, p += 4) flow.uv[i] = load_le<float>(p);
  return flow;
}

void write_flo(const FlowField& flow, const std::filesystem::path& path) {
  if (flow.uv.size() != static_cast<std::size_t>(flow.width) * flow.height * 2) {
    throw Error(ErrorCode::kShapeError, "flow buffer does not match its dimensions");
  }
  for (float v : flow.uv) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteValue, "flow holds a non-finite value");
  }
  std::vector<unsigned char> bytes(12 + flow.uv.size() * 4);
  store_le(kFloMagic, bytes.data());
  store_le(static_cast<std::int32_t>(flow.width), bytes.data() + 4);
  store_le(static_cast<std::int32_t>(flow.height), bytes.data() + 8);
  unsigned char* p = bytes.data() + 12;
  for (float v : flow.uv) {
    store_le(v, p);
    p += 4;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoFailure, "short write to " + path.string());
}

FlowStats flow_stats(const FlowField& flow) {
  FlowStats s;
  s.width = flow.width;
  s.height = flow.height;
  double sum = 0.0;
  for (int y = 0; y < flow.height; ++y)
    for (int x = 0; x < flow.width; ++x) {
      const double u = flow.u(y, x);
      const double v = flow.v(y, x);
      const double m = std::hypot(u, v);
      s.max_magnitude = std::max(s.max_magnitude, m);
      s.max_abs_u = std::max(s.max_abs_u, std::abs(u));
      s.max_abs_v = std::max(s.max_abs_v, std::abs(v));
      sum += m;
    }
  const double count = static_cast<double>(flow.width) * flow.height;
  s.mean_magnitude = count > 0 ? sum / count : 0.0;
  return s;
}

}  // namespace vosda
