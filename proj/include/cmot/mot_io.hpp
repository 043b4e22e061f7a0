#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "cmot/core.hpp"
#include "cmot/error.hpp"
#include "cmot/tracker.hpp"

namespace cmot {

// MOT challenge text formats. All files are comma separated without header:
//   detections:   frame,-1,x,y,w,h,confidence,-1,-1,-1[,feature...]
//   ground truth: frame,id,x,y,w,h[,mark[,class[,visibility]]]
//   results:      frame,id,x,y,w,h,1,-1,-1,-1
// Numbers are parsed with std::from_chars, so the process locale never
// affects decimal separators.

struct DetectionRecord {
  int frame = 1;
  BoundingBox bbox;
  double confidence = 0.0;
  std::optional<std::size_t> feature_row_index;
};

struct GroundTruthRecord {
  int frame = 1;
  int gt_id = 1;
  BoundingBox bbox;
  bool valid = true;  // false rows are ignored by evaluation
};

/// Dense float32 feature rows as stored in the DSFT container.
struct FeatureMatrix {
  std::uint32_t rows = 0;
  std::uint32_t dim = 0;
  std::vector<float> values;  // row-major, rows * dim

  std::span<const float> row(std::size_t r) const { return {values.data() + r * dim, dim}; }
};

inline constexpr std::array<char, 4> kFeatureMagic{'D', 'S', 'F', 'T'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 16;

namespace io_detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IoError, "failed reading " + path.string());
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Non-empty lines with their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string_view>> lines_of(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t number = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++number;
    line = trim(line);
    if (!line.empty()) out.emplace_back(number, line);
  }
  return out;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const std::size_t comma = line.find(',');
    out.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

[[noreturn]] inline void parse_fail(const std::filesystem::path& path, std::size_t line,
                                    const std::string& reason) {
  throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line) + ": " + reason);
}

inline double to_double(std::string_view field, const std::filesystem::path& path, std::size_t line,
                        std::size_t column) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
    parse_fail(path, line, "column " + std::to_string(column + 1) + " is not a number: '" +
                               std::string(field) + "'");
  }
  return value;
}

// Integral columns may be written as "3" or "3.0".
inline int to_int(std::string_view field, const std::filesystem::path& path, std::size_t line,
                  std::size_t column) {
  const double v = to_double(field, path, line, column);
  if (v != std::floor(v) || std::fabs(v) > 2e9) {
    parse_fail(path, line, "column " + std::to_string(column + 1) + " is not an integer");
  }
  return static_cast<int>(v);
}

inline BoundingBox parse_box(const std::vector<std::string_view>& f, const std::filesystem::path& path,
                             std::size_t line) {
  BoundingBox b{to_double(f[2], path, line, 2), to_double(f[3], path, line, 3),
                to_double(f[4], path, line, 4), to_double(f[5], path, line, 5)};
  if (!b.valid()) parse_fail(path, line, "box width and height must be positive");
  return b;
}

/// Fixed two-decimal rendering; "-0.00" is written as "0.00".
inline void append_fixed2(std::string& out, double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, 2);
  std::string_view s(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
  if (s == "-0.00") s = "0.00";
  out += s;
}

inline void append_shortest(std::string& out, double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFFu));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// DSFT feature container

inline FeatureMatrix decode_features(std::string_view bytes, const std::string& name = "<memory>") {
  auto bad = [&](const std::string& why) { throw Error(ErrorKind::ParseError, name + ": " + why); };
  if (bytes.size() < kFeatureHeaderBytes) bad("truncated feature header");
  if (std::memcmp(bytes.data(), kFeatureMagic.data(), 4) != 0) bad("bad magic, expected DSFT");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t version = io_detail::get_u32(p + 4);
  if (version != kFeatureVersion) bad("unsupported version " + std::to_string(version));
  FeatureMatrix fm;
  fm.rows = io_detail::get_u32(p + 8);
  fm.dim = io_detail::get_u32(p + 12);
  const std::uint64_t expected = kFeatureHeaderBytes + 4ull * fm.rows * fm.dim;
  if (bytes.size() != expected) {
    bad("size " + std::to_string(bytes.size()) + " bytes does not match header (expected " +
        std::to_string(expected) + ")");
  }
  fm.values.resize(static_cast<std::size_t>(fm.rows) * fm.dim);
  for (std::size_t k = 0; k < fm.values.size(); ++k) {
    fm.values[k] = std::bit_cast<float>(io_detail::get_u32(p + kFeatureHeaderBytes + 4 * k));
  }
  return fm;
}

inline std::string encode_features(const FeatureMatrix& fm) {
  if (fm.values.size() != static_cast<std::size_t>(fm.rows) * fm.dim) {
    throw Error(ErrorKind::DimensionMismatch, "feature matrix value count does not equal rows * dim");
  }
  std::string out(kFeatureMagic.data(), kFeatureMagic.size());
  io_detail::put_u32(out, kFeatureVersion);
  io_detail::put_u32(out, fm.rows);
  io_detail::put_u32(out, fm.dim);
  out.reserve(kFeatureHeaderBytes + 4 * fm.values.size());
  for (float v : fm.values) io_detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline FeatureMatrix read_features(const std::filesystem::path& path) {
  return decode_features(io_detail::read_file(path), path.string());
}

inline void write_features(const FeatureMatrix& fm, const std::filesystem::path& path) {
  io_detail::write_file(path, encode_features(fm));
}

// ---------------------------------------------------------------------------
// Detections

/// Raw detection file contents: one record per non-empty line, plus inline
/// feature columns when the lines carry more than ten fields.
struct DetectionFile {
  std::vector<DetectionRecord> records;
  std::optional<FeatureMatrix> inline_features;
  int last_frame = 0;
};

inline DetectionFile read_detection_records(const std::filesystem::path& path) {
  const std::string text = io_detail::read_file(path);
  DetectionFile out;
  std::optional<std::size_t> extra_columns;
  std::vector<float> inline_values;
  for (const auto& [number, line] : io_detail::lines_of(text)) {
    const auto f = io_detail::split_fields(line);
    if (f.size() < 10) {
      io_detail::parse_fail(path, number, "expected at least 10 columns, found " + std::to_string(f.size()));
    }
    DetectionRecord r;
    r.frame = io_detail::to_int(f[0], path, number, 0);
    if (r.frame < 1) io_detail::parse_fail(path, number, "frame must be >= 1");
    r.bbox = io_detail::parse_box(f, path, number);
    r.confidence = io_detail::to_double(f[6], path, number, 6);
    const std::size_t extra = f.size() - 10;
    if (!extra_columns) extra_columns = extra;
    if (*extra_columns != extra) {
      throw Error(ErrorKind::DimensionMismatch, path.string() + ":" + std::to_string(number) + ": " +
                                                    std::to_string(extra) + " feature columns, previous lines had " +
                                                    std::to_string(*extra_columns));
    }
    for (std::size_t k = 10; k < f.size(); ++k) {
      inline_values.push_back(static_cast<float>(io_detail::to_double(f[k], path, number, k)));
    }
    if (extra > 0) r.feature_row_index = out.records.size();
    out.last_frame = std::max(out.last_frame, r.frame);
    out.records.push_back(r);
  }
  if (extra_columns && *extra_columns > 0) {
    FeatureMatrix fm;
    fm.rows = static_cast<std::uint32_t>(out.records.size());
    fm.dim = static_cast<std::uint32_t>(*extra_columns);
    fm.values = std::move(inline_values);
    out.inline_features = std::move(fm);
  }
  return out;
}

/// Detections grouped by frame, filtered by `cfg.min_confidence`, with
/// descriptors attached by line order from either the sidecar feature file or
/// inline columns. Every frame from 1 to the last frame mentioned in the file
/// has an entry, possibly empty.
inline std::map<int, std::vector<Detection>> read_detections(
    const std::filesystem::path& det_path, const std::optional<std::filesystem::path>& feature_path,
    const TrackerConfig& cfg) {
  DetectionFile file = read_detection_records(det_path);
  std::optional<FeatureMatrix> features = std::move(file.inline_features);
  if (feature_path) {
    if (features) {
      throw Error(ErrorKind::ParseError, det_path.string() + ": inline features and a feature file are exclusive");
    }
    features = read_features(*feature_path);
    if (features->rows != file.records.size()) {
      throw Error(ErrorKind::RowCountMismatch, feature_path->string() + ": " + std::to_string(features->rows) +
                                                   " feature rows for " + std::to_string(file.records.size()) +
                                                   " detection lines");
    }
    for (std::size_t k = 0; k < file.records.size(); ++k) file.records[k].feature_row_index = k;
  }
  if (features && features->dim != static_cast<std::uint32_t>(cfg.feature_dim)) {
    throw Error(ErrorKind::DimensionMismatch, "feature dimension " + std::to_string(features->dim) +
                                                  " does not match feature_dim " + std::to_string(cfg.feature_dim));
  }

  std::map<int, std::vector<Detection>> frames;
  for (int f = 1; f <= file.last_frame; ++f) frames[f];
  std::vector<double> scratch;
  for (const DetectionRecord& r : file.records) {
    if (r.confidence < cfg.min_confidence) continue;
    Detection d{r.bbox, r.confidence, std::nullopt};
    if (features && r.feature_row_index) {
      const auto row = features->row(*r.feature_row_index);
      scratch.assign(row.begin(), row.end());
      try {
        d.descriptor = normalize_descriptor(scratch, static_cast<std::size_t>(cfg.feature_dim));
      } catch (const Error& e) {
        throw Error(e.kind(), "feature row " + std::to_string(*r.feature_row_index) + ": " + e.message());
      }
    }
    frames[r.frame].push_back(std::move(d));
  }
  return frames;
}

/// Canonical detection line layout: coordinates with two decimals, the
/// confidence in shortest round-trip form.
inline std::string format_detections(std::span<const DetectionRecord> records) {
  std::string out;
  for (const DetectionRecord& r : records) {
    out += std::to_string(r.frame);
    out += ",-1,";
    io_detail::append_fixed2(out, r.bbox.top_left_x);
    out += ',';
    io_detail::append_fixed2(out, r.bbox.top_left_y);
    out += ',';
    io_detail::append_fixed2(out, r.bbox.width);
    out += ',';
    io_detail::append_fixed2(out, r.bbox.height);
    out += ',';
    io_detail::append_shortest(out, r.confidence);
    out += ",-1,-1,-1\n";
  }
  return out;
}

inline void write_detections(std::span<const DetectionRecord> records, const std::filesystem::path& path) {
  io_detail::write_file(path, format_detections(records));
}

// ---------------------------------------------------------------------------
// Results

inline std::string format_results(std::span<const FrameOutput> outputs) {
  std::vector<std::pair<int, TrackOutput>> rows;
  for (const FrameOutput& fo : outputs) {
    for (const TrackOutput& t : fo.tracks) rows.emplace_back(fo.frame_index, t);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second.id < b.second.id;
  });
  std::string out;
  for (const auto& [frame, t] : rows) {
    out += std::to_string(frame);
    out += ',';
    out += std::to_string(t.id);
    out += ',';
    io_detail::append_fixed2(out, t.bbox.top_left_x);
    out += ',';
    io_detail::append_fixed2(out, t.bbox.top_left_y);
    out += ',';
    io_detail::append_fixed2(out, t.bbox.width);
    out += ',';
    io_detail::append_fixed2(out, t.bbox.height);
    out += ",1,-1,-1,-1\n";
  }
  return out;
}

inline void write_results(std::span<const FrameOutput> outputs, const std::filesystem::path& path) {
  io_detail::write_file(path, format_results(outputs));
}

/// Result file as FrameOutput list, one entry per frame that has rows,
/// ascending by frame then id.
inline std::vector<FrameOutput> read_results(const std::filesystem::path& path) {
  const std::string text = io_detail::read_file(path);
  std::map<int, std::vector<TrackOutput>> frames;
  std::set<std::pair<int, std::uint64_t>> seen;
  for (const auto& [number, line] : io_detail::lines_of(text)) {
    const auto f = io_detail::split_fields(line);
    if (f.size() < 6) io_detail::parse_fail(path, number, "expected at least 6 columns");
    const int frame = io_detail::to_int(f[0], path, number, 0);
    const int id = io_detail::to_int(f[1], path, number, 1);
    if (frame < 1) io_detail::parse_fail(path, number, "frame must be >= 1");
    if (id < 1) io_detail::parse_fail(path, number, "track id must be >= 1");
    if (!seen.emplace(frame, static_cast<std::uint64_t>(id)).second) {
      io_detail::parse_fail(path, number, "duplicate (frame, id)");
    }
    frames[frame].push_back({static_cast<std::uint64_t>(id), io_detail::parse_box(f, path, number)});
  }
  std::vector<FrameOutput> out;
  for (auto& [frame, tracks] : frames) {
    std::sort(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    out.push_back({frame, std::move(tracks)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ground truth

/// Rows are kept but marked invalid when the consider/mark column (7th) is 0
/// or the class column (8th) names something other than a pedestrian (1).
/// A class of -1 means "unspecified" and is accepted.
inline std::map<int, std::vector<GroundTruthRecord>> read_ground_truth(const std::filesystem::path& path) {
  const std::string text = io_detail::read_file(path);
  std::map<int, std::vector<GroundTruthRecord>> out;
  std::set<std::pair<int, int>> seen;
  for (const auto& [number, line] : io_detail::lines_of(text)) {
    const auto f = io_detail::split_fields(line);
    if (f.size() < 6) io_detail::parse_fail(path, number, "expected at least 6 columns");
    GroundTruthRecord r;
    r.frame = io_detail::to_int(f[0], path, number, 0);
    r.gt_id = io_detail::to_int(f[1], path, number, 1);
    if (r.frame < 1) io_detail::parse_fail(path, number, "frame must be >= 1");
    if (r.gt_id < 1) io_detail::parse_fail(path, number, "ground-truth id must be >= 1");
    r.bbox = io_detail::parse_box(f, path, number);
    if (f.size() > 6 && io_detail::to_double(f[6], path, number, 6) == 0.0) r.valid = false;
    if (f.size() > 7) {
      const int cls = io_detail::to_int(f[7], path, number, 7);
      if (cls != 1 && cls != -1) r.valid = false;
    }
    if (!seen.emplace(r.frame, r.gt_id).second) {
      io_detail::parse_fail(path, number, "duplicate (frame, id)");
    }
    out[r.frame].push_back(r);
  }
  return out;
}

}  // namespace cmot
