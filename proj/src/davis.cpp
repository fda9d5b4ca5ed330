#include "vosda/davis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vosda/error.hpp"
#include "vosda/flo.hpp"
#include "vosda/hash.hpp"

namespace vosda {

namespace {

std::string frame_name(int index, const char* ext) {
  std::ostringstream os;
  os << std::setw(5) << std::setfill('0') << index << ext;
  return os.str();
}

std::optional<int> parse_index(const fs::path& file) {
  const std::string stem = file.stem().string();
  if (stem.empty() || !std::all_of(stem.begin(), stem.end(), ::isdigit)) return std::nullopt;
  return std::stoi(stem);
}

// index -> file, for every file with one of `extensions` in `dir`.
std::map<int, fs::path> index_files(const fs::path& dir, std::initializer_list<const char*> extensions) {
  std::map<int, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (std::none_of(extensions.begin(), extensions.end(), [&](const char* e) { return ext == e; }))
      continue;
    if (auto idx = parse_index(entry.path())) out.emplace(*idx, entry.path());
  }
  return out;
}

std::vector<std::string> read_list(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + file.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string hash_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Fnv1a h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + file.string());
  out << text;
}

}  // namespace

const char* split_name(Split split) { return split == Split::kTrain ? "train" : "test"; }

Split parse_split(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "test" || text == "val") return Split::kTest;
  throw Error(ErrorCode::kUsage, "unknown split '" + text + "'");
}

std::size_t DatasetHandle::usable_samples() const {
  std::size_t n = 0;
  for (const auto& s : sequences)
    n += static_cast<std::size_t>(
        std::count_if(s.frame_indices.begin(), s.frame_indices.end(), [](int i) { return i >= 1; }));
  return n;
}

std::size_t DatasetHandle::annotated_samples() const {
  std::size_t n = 0;
  for (const auto& s : sequences)
    for (std::size_t i = 0; i < s.frames.size(); ++i)
      if (s.frame_indices[i] >= 1 && s.masks[i]) ++n;
  return n;
}

DatasetHandle load_davis_layout(const fs::path& root, Split split, bool labeled) {
  DatasetHandle handle;
  handle.root = root;
  handle.split = split;
  handle.labeled = labeled;

  const fs::path images = root / "JPEGImages";
  const fs::path annotations = root / "Annotations";
  const fs::path flows = root / "Flow";
  if (!fs::is_directory(root)) throw Error(ErrorCode::kLayoutError, "missing directory " + root.string());
  if (!fs::is_directory(images)) throw Error(ErrorCode::kLayoutError, "missing directory " + images.string());
  if (labeled && !fs::is_directory(annotations)) {
    throw Error(ErrorCode::kLayoutError, "missing directory " + annotations.string());
  }

  std::vector<std::string> ids;
  const fs::path lists = root / "ImageSets";
  const fs::path list_file = lists / (std::string(split_name(split)) + ".txt");
  if (fs::exists(list_file)) {
    ids = read_list(list_file);
    const fs::path other = lists / (std::string(split_name(split == Split::kTrain ? Split::kTest
                                                                                 : Split::kTrain)) +
                                    ".txt");
    if (fs::exists(other)) {
      const auto other_ids = read_list(other);
      const std::set<std::string> mine(ids.begin(), ids.end());
      for (const auto& id : other_ids) {
        if (mine.count(id)) {
          throw Error(ErrorCode::kLayoutError, "sequence " + id + " listed in both splits");
        }
      }
    }
  } else {
    for (const auto& entry : fs::directory_iterator(images))
      if (entry.is_directory()) ids.push_back(entry.path().filename().string());
    std::sort(ids.begin(), ids.end());
  }

  for (const auto& id : ids) {
    const fs::path seq_images = images / id;
    if (!fs::is_directory(seq_images)) {
      throw Error(ErrorCode::kLayoutError, "missing directory " + seq_images.string());
    }
    SequenceEntry entry;
    entry.id = id;
    const auto frames = index_files(seq_images, {".jpg", ".jpeg", ".png"});
    std::map<int, fs::path> masks;
    if (labeled) {
      const fs::path seq_masks = annotations / id;
      if (!fs::is_directory(seq_masks)) {
        throw Error(ErrorCode::kLayoutError, "missing directory " + seq_masks.string());
      }
      masks = index_files(seq_masks, {".png"});
      for (const auto& [idx, path] : masks) {
        if (!frames.count(idx)) {
          throw Error(ErrorCode::kCountMismatch, "annotation " + path.string() +
                                                     " has no image in sequence " + id);
        }
      }
    }
    std::map<int, fs::path> flow_files;
    if (fs::is_directory(flows / id)) flow_files = index_files(flows / id, {".flo"});
    for (const auto& [idx, path] : frames) {
      entry.frame_indices.push_back(idx);
      entry.frames.push_back(path);
      auto m = masks.find(idx);
      entry.masks.push_back(m == masks.end() ? std::nullopt : std::optional<fs::path>(m->second));
      auto f = flow_files.find(idx);
      entry.flows.push_back(f == flow_files.end() ? std::nullopt
                                                  : std::optional<fs::path>(f->second));
    }
    handle.sequences.push_back(std::move(entry));
  }
  return handle;
}

Tensor read_rgb_image(const fs::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error(ErrorCode::kIoFailure, "cannot decode image " + path.string());
  Tensor t(1, 3, bgr.rows, bgr.cols);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x)
      for (int c = 0; c < 3; ++c) t.at(0, c, y, x) = row[x][2 - c] / 255.0;
  }
  return t;
}

void write_rgb_image(const Tensor& image, const fs::path& path) {
  cv::Mat bgr(image.h(), image.w(), CV_8UC3);
  for (int y = 0; y < image.h(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.w(); ++x)
      for (int c = 0; c < 3; ++c)
        row[x][2 - c] = static_cast<unsigned char>(
            std::lround(std::clamp(image.at(0, c, y, x), 0.0, 1.0) * 255.0));
  }
  const std::vector<int> params{cv::IMWRITE_JPEG_QUALITY, 100};
  if (!cv::imwrite(path.string(), bgr, params)) {
    throw Error(ErrorCode::kIoFailure, "cannot write image " + path.string());
  }
}

Tensor read_mask_png(const fs::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (m.empty()) throw Error(ErrorCode::kIoFailure, "cannot decode mask " + path.string());
  Tensor t(1, 1, m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<unsigned char>(y);
    for (int x = 0; x < m.cols; ++x) t.at(0, 0, y, x) = row[x] >= 128 ? 1.0 : 0.0;
  }
  return t;
}

void write_mask_png(const Tensor& mask, const fs::path& path) {
  cv::Mat m(mask.h(), mask.w(), CV_8UC1);
  for (int y = 0; y < mask.h(); ++y) {
    auto* row = m.ptr<unsigned char>(y);
    for (int x = 0; x < mask.w(); ++x) row[x] = mask.at(0, 0, y, x) > 0.5 ? 255 : 0;
  }
  if (!cv::imwrite(path.string(), m)) {
    throw Error(ErrorCode::kIoFailure, "cannot write mask " + path.string());
  }
}

FrameSample load_sample(const DatasetHandle& handle, std::size_t seq, std::size_t frame,
                        bool read_labels, Domain domain) {
  const SequenceEntry& entry = handle.sequences.at(seq);
  const int index = entry.frame_indices.at(frame);
  if (index < 1) {
    throw Error(ErrorCode::kLayoutError, entry.id + " frame 0 anchors flow and is not a sample");
  }
  FrameSample s;
  s.sequence_id = entry.id;
  s.frame_index = index;
  s.domain = domain;
  s.image = read_rgb_image(entry.frames[frame]);
  if (!entry.flows[frame]) {
    throw Error(ErrorCode::kLayoutError,
                "missing flow file for " + entry.id + "/" + frame_name(index, ".flo"));
  }
  s.flow = read_flo(*entry.flows[frame]).to_tensor();
  if (s.flow.h() != s.image.h() || s.flow.w() != s.image.w()) {
    throw Error(ErrorCode::kShapeError, "flow " + entry.flows[frame]->string() +
                                            " does not match its frame resolution");
  }
  if (read_labels && entry.masks[frame]) s.set_mask(read_mask_png(*entry.masks[frame]));
  return s;
}

std::vector<FrameSample> load_samples(const DatasetHandle& handle, bool read_labels, Domain domain) {
  std::vector<FrameSample> out;
  for (std::size_t s = 0; s < handle.sequences.size(); ++s)
    for (std::size_t f = 0; f < handle.sequences[s].frames.size(); ++f)
      if (handle.sequences[s].frame_indices[f] >= 1)
        out.push_back(load_sample(handle, s, f, read_labels, domain));
  return out;
}

std::string materialize_dataset(const SyntheticDatasetSpec& spec, const SyntheticDataset& data,
                                const fs::path& out_dir, bool force) {
  if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !force) {
    throw Error(ErrorCode::kUsage, out_dir.string() + " exists and is not empty (use --force)");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + out_dir.string());

  std::vector<std::string> written;
  auto write_sequence = [&](const SyntheticSequence& seq) {
    const fs::path img_dir = out_dir / "JPEGImages" / seq.id;
    const fs::path ann_dir = out_dir / "Annotations" / seq.id;
    const fs::path flo_dir = out_dir / "Flow" / seq.id;
    for (const auto& d : {img_dir, ann_dir, flo_dir}) fs::create_directories(d);
    write_rgb_image(seq.anchor_image, img_dir / frame_name(0, ".jpg"));
    write_mask_png(seq.anchor_mask, ann_dir / frame_name(0, ".png"));
    written.push_back("JPEGImages/" + seq.id + "/" + frame_name(0, ".jpg"));
    written.push_back("Annotations/" + seq.id + "/" + frame_name(0, ".png"));
    for (const auto& s : seq.samples) {
      write_rgb_image(s.image, img_dir / frame_name(s.frame_index, ".jpg"));
      write_mask_png(s.mask(), ann_dir / frame_name(s.frame_index, ".png"));
      write_flo(FlowField::from_tensor(s.flow), flo_dir / frame_name(s.frame_index, ".flo"));
      written.push_back("JPEGImages/" + seq.id + "/" + frame_name(s.frame_index, ".jpg"));
      written.push_back("Annotations/" + seq.id + "/" + frame_name(s.frame_index, ".png"));
      written.push_back("Flow/" + seq.id + "/" + frame_name(s.frame_index, ".flo"));
    }
  };
  std::ostringstream train_list, test_list;
  for (const auto& seq : data.train) {
    write_sequence(seq);
    train_list << seq.id << '\n';
  }
  for (const auto& seq : data.test) {
    write_sequence(seq);
    test_list << seq.id << '\n';
  }
  fs::create_directories(out_dir / "ImageSets");
  write_text(out_dir / "ImageSets" / "train.txt", train_list.str());
  write_text(out_dir / "ImageSets" / "test.txt", test_list.str());
  written.push_back("ImageSets/train.txt");
  written.push_back("ImageSets/test.txt");

  nlohmann::ordered_json manifest;
  manifest["name"] = spec.name;
  manifest["seed"] = spec.sequence.seed;
  manifest["spec_hash"] = spec.hash();
  manifest["style"] = style_name(spec.sequence.style);
  manifest["train_sequences"] = data.train.size();
  manifest["test_sequences"] = data.test.size();
  Fnv1a all;
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  for (const auto& rel : written) {
    const std::string h = hash_file(out_dir / rel);
    files[rel] = h;
    all.update(rel);
    all.update(h);
  }
  manifest["files"] = files;
  manifest["manifest_hash"] = all.hex();
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return all.hex();
}

}  // namespace vosda
