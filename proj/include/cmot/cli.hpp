#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmot/clearmot.hpp"
#include "cmot/core.hpp"
#include "cmot/descriptor_contract.hpp"
#include "cmot/error.hpp"
#include "cmot/gate_check.hpp"
#include "cmot/json_io.hpp"
#include "cmot/mot_io.hpp"
#include "cmot/render.hpp"
#include "cmot/tracker.hpp"

// Subcommand bodies of the `cmot` executable, kept in a header so tests can
// drive them without spawning a process. Exit codes: 0 success, 1 I/O
// failure, 2 validation failure, 3 diagnostic failure.

namespace cmot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDiagnostic = 3;

namespace detail {

inline std::string single_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << single_line(e.what()) << '\n';
    return e.is_io() ? kExitIo : kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: InvalidConfig: " << single_line(e.what()) << '\n';
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: IoError: " << single_line(e.what()) << '\n';
    return kExitIo;
  }
}

inline json read_json_file(const std::filesystem::path& path) {
  const std::string text = io_detail::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
  }
}

inline void write_text(const std::optional<std::filesystem::path>& path, const std::string& text,
                       std::ostream& fallback) {
  if (path) {
    io_detail::write_file(*path, text);
  } else {
    fallback << text;
  }
}

}  // namespace detail

struct TrackArgs {
  std::filesystem::path detections;
  std::optional<std::filesystem::path> features;
  std::filesystem::path output;
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::string> sequence_name;
};

struct TrackRun {
  std::vector<FrameOutput> outputs;
  TrackerConfig config;
  std::size_t frame_count = 0;
  double wall_clock_ms = 0.0;
};

/// Runs the tracker over every frame of a detection file, in frame order.
inline TrackRun track_sequence(const std::map<int, std::vector<Detection>>& frames, const TrackerConfig& cfg) {
  TrackRun run;
  run.config = cfg;
  Tracker tracker(cfg);
  const auto start = std::chrono::steady_clock::now();
  for (const auto& [frame, detections] : frames) {
    FrameOutput out = tracker.step(detections, frame);
    if (!out.tracks.empty()) run.outputs.push_back(std::move(out));
    ++run.frame_count;
  }
  run.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return run;
}

inline int run_track(const TrackArgs& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    TrackerConfig cfg;
    if (args.config) cfg = config_from_json(detail::read_json_file(*args.config));
    cfg.validate();
    const auto frames = read_detections(args.detections, args.features, cfg);
    const TrackRun run = track_sequence(frames, cfg);
    write_results(run.outputs, args.output);

    if (args.manifest) {
      const double seconds = run.wall_clock_ms / 1000.0;
      json m{{"sequence", args.sequence_name.value_or(args.detections.stem().string())},
             {"inputs",
              {{"detections", args.detections.string()},
               {"features", args.features ? json(args.features->string()) : json(nullptr)},
               {"config", args.config ? json(args.config->string()) : json(nullptr)}}},
             {"config", config_to_json(run.config)},
             {"output", args.output.string()},
             {"frame_count", run.frame_count},
             {"wall_clock_ms", run.wall_clock_ms},
             {"frames_per_second", seconds > 0.0 ? static_cast<double>(run.frame_count) / seconds : 0.0}};
      io_detail::write_file(*args.manifest, m.dump(2) + "\n");
    }
    out << "tracked " << run.frame_count << " frames\n";
    return kExitOk;
  });
}

struct EvaluateArgs {
  std::filesystem::path gt;
  std::filesystem::path result;
  std::optional<std::filesystem::path> report;
  double iou_threshold = 0.5;
};

inline int run_evaluate(const EvaluateArgs& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto gt = read_ground_truth(args.gt);
    const auto results = read_results(args.result);
    const MetricsReport report = evaluate_sequence(gt, results, args.iou_threshold);
    detail::write_text(args.report, report_to_json(report).dump(2) + "\n", out);
    return kExitOk;
  });
}

struct GateCheckArgs {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
};

inline int run_gate_check(const GateCheckArgs& args, std::ostream& out = std::cout,
                          std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const GateCheckReport r = cmot::run_gate_check(args.samples, args.seed);
    const json j{{"samples", r.samples}, {"seed", r.seed},   {"threshold", r.threshold}, {"fraction", r.fraction},
                 {"lower", r.lower},     {"upper", r.upper}, {"pass", r.pass}};
    out << j.dump(2) << '\n';
    if (!r.pass) {
      err << "error: in-gate fraction " << r.fraction << " outside [" << r.lower << ", " << r.upper << "]\n";
      return kExitDiagnostic;
    }
    return kExitOk;
  });
}

struct RenderArgs {
  std::filesystem::path result;
  std::string frame_size = "1920x1080";
  std::filesystem::path out_dir;
};

inline std::pair<int, int> parse_frame_size(const std::string& s) {
  const auto x = s.find('x');
  auto bad = [&] { throw Error(ErrorKind::InvalidConfig, "frame-size: expected WxH, got '" + s + "'"); };
  if (x == std::string::npos) bad();
  int w = 0, h = 0;
  const auto [p1, e1] = std::from_chars(s.data(), s.data() + x, w);
  const auto [p2, e2] = std::from_chars(s.data() + x + 1, s.data() + s.size(), h);
  if (e1 != std::errc{} || e2 != std::errc{} || p1 != s.data() + x || p2 != s.data() + s.size() || w <= 0 ||
      h <= 0) {
    bad();
  }
  return {w, h};
}

inline std::string svg_name(int frame) {
  std::string digits = std::to_string(frame);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "frame_" + digits + ".svg";
}

/// Writes frame_NNNNNN.svg for every frame from 1 to the last frame in the
/// result file; frames without tracks get an empty canvas.
inline int run_render(const RenderArgs& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto [w, h] = parse_frame_size(args.frame_size);
    const auto results = read_results(args.result);
    std::error_code ec;
    std::filesystem::create_directories(args.out_dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + args.out_dir.string() + ": " + ec.message());
    const int last = results.empty() ? 0 : results.back().frame_index;
    std::size_t k = 0;
    for (int f = 1; f <= last; ++f) {
      FrameOutput frame{f, {}};
      if (k < results.size() && results[k].frame_index == f) frame = results[k++];
      io_detail::write_file(args.out_dir / svg_name(f), render_frame_svg(frame, w, h));
    }
    out << "rendered " << last << " frames\n";
    return kExitOk;
  });
}

struct ShapesArgs {
  std::optional<std::filesystem::path> layers;
};

/// Prints the output shape of every layer, either of the built-in
/// re-identification network or of a JSON layer list.
inline int run_shapes(const ShapesArgs& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    Shape input = reid_input_shape();
    std::vector<LayerSpec> layers = reid_architecture();
    if (args.layers) {
      const json j = detail::read_json_file(*args.layers);
      if (j.is_object()) {
        if (j.contains("input")) input = j["input"].get<Shape>();
        layers = layers_from_json(j.at("layers"));
      } else {
        layers = layers_from_json(j);
      }
    }
    const auto shapes = propagate_shapes(layers, input);
    for (std::size_t k = 0; k < layers.size(); ++k) {
      out << layers[k].name << '\t' << format_shape(shapes[k]) << '\n';
    }
    return kExitOk;
  });
}

}  // namespace cmot::cli
