#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cmot/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Online multi-object tracker with appearance cascade and CLEAR-MOT evaluation"};
  app.require_subcommand(1);

  cmot::cli::TrackArgs track;
  std::string features, config, manifest, sequence;
  auto* track_cmd = app.add_subcommand("track", "Track a detection sequence and write MOT results");
  track_cmd->add_option("--detections", track.detections, "Detection CSV")->required();
  track_cmd->add_option("--features", features, "DSFT feature file aligned to detection lines");
  track_cmd->add_option("--output", track.output, "Result CSV to write")->required();
  track_cmd->add_option("--config", config, "JSON file overriding tracker defaults");
  track_cmd->add_option("--manifest", manifest, "Run manifest JSON to write");
  track_cmd->add_option("--sequence-name", sequence, "Name recorded in the manifest");

  cmot::cli::EvaluateArgs evaluate;
  std::string report;
  auto* eval_cmd = app.add_subcommand("evaluate", "CLEAR-MOT metrics of a result file");
  eval_cmd->add_option("--gt", evaluate.gt, "Ground-truth CSV")->required();
  eval_cmd->add_option("--result", evaluate.result, "Result CSV")->required();
  eval_cmd->add_option("--report", report, "Write the JSON report here instead of stdout");

  cmot::cli::GateCheckArgs gate;
  auto* gate_cmd = app.add_subcommand("gate-check", "Monte Carlo calibration check of the Mahalanobis gate");
  gate_cmd->add_option("--samples", gate.samples, "Number of draws")->capture_default_str();
  gate_cmd->add_option("--seed", gate.seed, "RNG seed")->capture_default_str();

  cmot::cli::RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Write one SVG overlay per frame of a result file");
  render_cmd->add_option("--result", render.result, "Result CSV")->required();
  render_cmd->add_option("--frame-size", render.frame_size, "Canvas size WxH")->capture_default_str();
  render_cmd->add_option("--out-dir", render.out_dir, "Output directory")->required();

  cmot::cli::ShapesArgs shapes;
  std::string layers;
  auto* shapes_cmd = app.add_subcommand("shapes", "Propagate layer output shapes of the appearance network");
  shapes_cmd->add_option("--layers", layers, "JSON layer description (default: built-in network)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cmot::cli::kExitValidation;
  }

  if (*track_cmd) {
    if (!features.empty()) track.features = features;
    if (!config.empty()) track.config = config;
    if (!manifest.empty()) track.manifest = manifest;
    if (!sequence.empty()) track.sequence_name = sequence;
    return cmot::cli::run_track(track);
  }
  if (*eval_cmd) {
    if (!report.empty()) evaluate.report = report;
    return cmot::cli::run_evaluate(evaluate);
  }
  if (*gate_cmd) return cmot::cli::run_gate_check(gate);
  if (*render_cmd) return cmot::cli::run_render(render);
  if (*shapes_cmd) {
    if (!layers.empty()) shapes.layers = layers;
    return cmot::cli::run_shapes(shapes);
  }
  return cmot::cli::kExitValidation;
}
