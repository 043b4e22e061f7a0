// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cmot/cmot.hpp"
#include "test_support.hpp"

namespace {

using namespace cmot;
using Clock = std::chrono::steady_clock;

const std::filesystem::path kData = CMOT_TEST_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome assignment_oracle() {
  std::mt19937_64 rng(20240601);
  int agree = 0;
  const int cases = 500;
  const auto t0 = Clock::now();
  for (int k = 0; k < cases; ++k) {
    const Eigen::MatrixXd c = testing::random_integer_matrix(rng, 7, 99);
    if (min_cost_matching(c).total_cost == testing::brute_force_assignment(c).best_total) ++agree;
  }
  const double t = seconds_since(t0);
  return {agree == cases && t < 5.0,
          std::to_string(agree) + "/" + std::to_string(cases) + " exact, " + fmt("%.3f s", t)};
}

Outcome gate_calibration() {
  const auto t0 = Clock::now();
  const GateCheckReport r = run_gate_check(10000, 7);
  const double t = seconds_since(t0);
  return {r.fraction >= 0.94 && r.fraction <= 0.96 && t < 1.0,
          fmt("fraction %.4f", r.fraction) + fmt(", %.3f s", t)};
}

Outcome kalman_invariants() {
  const KalmanFilter kf;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 1.0);
  int failures = 0;
  double worst_asym = 0.0, worst_eig = std::numeric_limits<double>::infinity();
  StateDistribution s = kf.initiate({640, 360, 0.41, 180});
  for (int k = 0; k < 1000; ++k) {
    // Alternate between a continuing track and fresh random states.
    if (k % 10 == 0) s = random_state(rng);
    s = kf.predict(s);
    const ProjectedDistribution p = kf.project(s);
    const double at_mean = kf.gating_distance(s, std::vector{MeasurementXYAH::from_vector(p.mean)})[0];
    const MeasVector z = p.mean + MeasVector(4 * n(rng), 4 * n(rng), 0.02 * n(rng), 3 * n(rng));
    const double trace_before = s.covariance.trace();
    s = kf.update(s, MeasurementXYAH::from_vector(z));
    const double asym = (s.covariance - s.covariance.transpose()).cwiseAbs().maxCoeff();
    const double eig = Eigen::SelfAdjointEigenSolver<StateMatrix>(s.covariance).eigenvalues().minCoeff();
    worst_asym = std::max(worst_asym, asym);
    worst_eig = std::min(worst_eig, eig);
    if (asym > 1e-9 || eig < -1e-9 || s.covariance.trace() > trace_before || at_mean != 0.0) ++failures;
  }
  return {failures == 0, std::to_string(1000 - failures) + "/1000 cycles, max asymmetry " +
                             fmt("%.2e", worst_asym) + fmt(", min eigenvalue %.3e", worst_eig)};
}

Outcome cascade_priority() {
  TrackerConfig cfg;
  cfg.lambda = 0.0;
  const KalmanFilter kf;
  const BoundingBox box{300, 200, 40, 100};
  auto make = [&](std::uint64_t id, int age, double distance) {
    Track t{id, kf.initiate(bbox_to_xyah(box)), age, cfg.n_init, TrackStatus::Confirmed,
            Gallery(static_cast<std::size_t>(cfg.gallery_budget), 128)};
    t.gallery.append(testing::descriptor_at_distance(128, 0, id, distance));
    return t;
  };
  const std::vector<Track> tracks{make(1, 1, 0.15), make(2, 5, 0.05)};
  const std::vector<Detection> dets{{box, 0.9, testing::axis_descriptor(128, 0)}};
  const CostMatrices costs = build_cost_matrices(tracks, dets, cfg, kf);
  const bool setup_ok = costs.admissible.all() && costs.cost(1, 0) < costs.cost(0, 0);
  const MatchSet m = matching_cascade(tracks, dets, cfg, kf);
  const bool young_wins = m.matches.size() == 1 && m.matches[0].first == 0;
  return {setup_ok && young_wins, fmt("cost young %.3f", costs.cost(0, 0)) + fmt(" old %.3f, ", costs.cost(1, 0)) +
                                      (young_wins ? "age-1 track matched" : "age-1 track NOT matched")};
}

MetricsReport run_scenario(const testing::Scenario& s, const TrackerConfig& cfg, std::vector<FrameOutput>& outs) {
  Tracker tracker(cfg);
  for (int f = 1; f <= s.frames; ++f) outs.push_back(tracker.step(s.detections.at(f), f));
  return evaluate_sequence(testing::truth_records(s), outs);
}

// Hypothesis id matched to a target in frame f, 0 if none.
std::uint64_t id_of(const testing::Scenario& s, const std::vector<FrameOutput>& outs, int frame, int target) {
  for (const auto& [id, box] : s.truth.at(frame)) {
    if (id != target) continue;
    for (const TrackOutput& t : outs[static_cast<std::size_t>(frame - 1)].tracks) {
      if (iou(t.bbox, box) >= 0.5) return t.id;
    }
  }
  return 0;
}

Outcome occlusion_identity() {
  const auto t0 = Clock::now();
  const testing::Scenario s = testing::crossing_scenario(60, 10, 128);
  TrackerConfig appearance;
  appearance.lambda = 0.0;
  appearance.max_age = 30;
  std::vector<FrameOutput> a_out;
  const MetricsReport a = run_scenario(s, appearance, a_out);

  TrackerConfig iou_only = appearance;
  iou_only.use_appearance_cascade = false;
  std::vector<FrameOutput> b_out;
  const MetricsReport b = run_scenario(s, iou_only, b_out);

  // Repeat the appearance run to confirm determinism.
  std::vector<FrameOutput> a_again;
  run_scenario(s, appearance, a_again);
  const double t = seconds_since(t0);

  const bool resumed = id_of(s, a_out, 20, 1) != 0 && id_of(s, a_out, 20, 1) == id_of(s, a_out, 60, 1) &&
                       id_of(s, a_out, 20, 2) != 0 && id_of(s, a_out, 20, 2) == id_of(s, a_out, 60, 2);
  return {a.id_switches == 0 && resumed && b.id_switches >= 1 && a_out == a_again && t < 1.0,
          "appearance IDSW " + std::to_string(a.id_switches) + (resumed ? " (ids resumed)" : " (ids lost)") +
              ", IoU-only IDSW " + std::to_string(b.id_switches) + fmt(", %.3f s", t)};
}

Outcome clearmot_fixture() {
  std::map<int, std::vector<GroundTruthRecord>> gt;
  std::vector<FrameOutput> res;
  for (int f = 1; f <= 6; ++f) {
    const BoundingBox b1{10.0 * f, 0, 10, 10};
    gt[f].push_back({f, 1, b1, true});
    FrameOutput fo{f, {{f < 4 ? 7u : 9u, b1}}};
    if (f <= 4) {
      const BoundingBox b2{500, 0, 10, 10};
      gt[f].push_back({f, 2, b2, true});
      fo.tracks.push_back({8, b2});
    }
    res.push_back(fo);
  }
  const MetricsReport r = evaluate_sequence(gt, res);
  const bool ok = r.gt_boxes == 10 && std::abs(r.mota - 0.9) <= 1e-9 && r.id_switches == 1 &&
                  r.false_positives == 0 && r.false_negatives == 0 && r.fragmentations == 0;
  return {ok, fmt("MOTA %.12f", r.mota) + ", ID " + std::to_string(r.id_switches) + ", FM " +
                  std::to_string(r.fragmentations) + ", boxes " + std::to_string(r.gt_boxes)};
}

Outcome shape_contract() {
  const std::vector<std::string> expected{"32x128x64", "32x128x64", "32x64x32", "32x64x32", "32x64x32",
                                          "64x32x16",  "64x32x16",  "128x16x8", "128x16x8", "128"};
  const auto shapes = propagate_shapes(reid_architecture(), reid_input_shape());
  int ok = 0;
  for (std::size_t k = 0; k < expected.size() && k < shapes.size(); ++k) {
    if (format_shape(shapes[k]) == expected[k]) ++ok;
  }
  const bool normalized = shapes.size() == 11 && format_shape(shapes[10]) == "128";
  return {ok == 10 && normalized, std::to_string(ok) + "/10 layer sizes match"};
}

Outcome format_golden() {
  int ok = 0, total = 0;
  auto check = [&](bool b) {
    ++total;
    if (b) ++ok;
  };
  try {
    for (const char* name : {"small.det", "walk.det"}) {
      check(format_detections(read_detection_records(kData / name).records) == io_detail::read_file(kData / name));
    }
    for (const char* name : {"small.dsft", "walk.dsft"}) {
      check(encode_features(read_features(kData / name)) == io_detail::read_file(kData / name));
    }
    for (const char* name : {"small_results.txt", "walk_track.golden"}) {
      check(format_results(read_results(kData / name)) == io_detail::read_file(kData / name));
    }
    const std::string good = io_detail::read_file(kData / "small.dsft");
    for (const std::string& bad : {good.substr(0, good.size() - 4), good + std::string(1, '\0')}) {
      bool rejected = false;
      try {
        decode_features(bad);
      } catch (const Error& e) {
        rejected = e.kind() == ErrorKind::ParseError;
      }
      check(rejected);
    }
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " checks"};
}

Outcome throughput() {
  const testing::Scenario s = testing::grid_scenario(50, 1000, 128, 11);
  Tracker tracker;
  std::size_t emitted = 0;
  const auto t0 = Clock::now();
  for (int f = 1; f <= s.frames; ++f) emitted += tracker.step(s.detections.at(f), f).tracks.size();
  const double t = seconds_since(t0);
  const double fps = s.frames / t;
  // Sanity: nearly every target should be reported in nearly every frame.
  const bool tracked = emitted >= static_cast<std::size_t>(0.95 * 50 * 1000);
  return {fps >= 60.0 && tracked, fmt("%.1f frames/s", fps) + ", " + std::to_string(emitted) + " boxes emitted"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 assignment oracle", assignment_oracle},
      {"2 chi-square gate calibration", gate_calibration},
      {"3 kalman invariants", kalman_invariants},
      {"4 cascade priority", cascade_priority},
      {"5 occlusion identity", occlusion_identity},
      {"6 clear-mot hand fixture", clearmot_fixture},
      {"7 descriptor shape contract", shape_contract},
      {"8 format golden files", format_golden},
      {"9 throughput", throughput},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
