#include <sys/wait.h>

#include <cstdlib>
#include <regex>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "cmot/cli.hpp"
#include "test_support.hpp"

namespace cmot {
namespace {

const std::filesystem::path kData = CMOT_TEST_DATA_DIR;
const std::string kCli = CMOT_CLI_PATH;

struct Proc {
  int code = -1;
  std::string out;
  std::string err;
};

Proc run_cli(const std::string& args, const testing::TempDir& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = "'" + kCli + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Proc p;
  p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  p.out = io_detail::read_file(out);
  p.err = io_detail::read_file(err);
  return p;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

TEST(CliTrack, GoldenOutput) {
  testing::TempDir dir;
  const Proc p = run_cli("track --detections " + q(kData / "walk.det") + " --features " + q(kData / "walk.dsft") +
                             " --output " + q(dir / "out.txt"),
                         dir);
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(io_detail::read_file(dir / "out.txt"), io_detail::read_file(kData / "walk_track.golden"));
}

TEST(CliTrack, GoldenOutputScoresPerfectly) {
  const MetricsReport r =
      evaluate_sequence(read_ground_truth(kData / "walk_gt.txt"), read_results(kData / "walk_track.golden"));
  EXPECT_EQ(r.id_switches, 0u);
  EXPECT_EQ(r.false_positives, 0u);
  EXPECT_GT(r.mota, 0.8);
}

TEST(CliTrack, MissingDetectionsIsIoFailure) {
  testing::TempDir dir;
  const Proc p = run_cli("track --detections " + q(dir / "absent.det") + " --output " + q(dir / "out.txt"), dir);
  EXPECT_EQ(p.code, 1);
  EXPECT_EQ(count(p.err, "\n"), 1u) << p.err;
  EXPECT_NE(p.err.find("IoError"), std::string::npos);
}

TEST(CliTrack, UnknownConfigKeyIsValidationFailure) {
  testing::TempDir dir;
  io_detail::write_file(dir / "cfg.json", R"({"lambda": 0.0, "lamda": 0.5})");
  const Proc p = run_cli("track --detections " + q(kData / "walk.det") + " --features " + q(kData / "walk.dsft") +
                             " --output " + q(dir / "out.txt") + " --config " + q(dir / "cfg.json"),
                         dir);
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.err.find("lamda"), std::string::npos) << p.err;
  EXPECT_EQ(count(p.err, "\n"), 1u);
}

TEST(CliTrack, RowCountMismatchIsValidationFailure) {
  testing::TempDir dir;
  std::ostringstream out, err;
  cli::TrackArgs args{kData / "small.det", kData / "small_short.dsft", dir / "out.txt", std::nullopt, std::nullopt,
                      std::nullopt};
  EXPECT_EQ(cli::run_track(args, out, err), cli::kExitValidation);
  EXPECT_NE(err.str().find("RowCountMismatch"), std::string::npos);
}

TEST(CliTrack, BadFlagsAreValidationFailure) {
  testing::TempDir dir;
  EXPECT_EQ(run_cli("track --output " + q(dir / "out.txt"), dir).code, 2);
  EXPECT_EQ(run_cli("frobnicate", dir).code, 2);
  EXPECT_EQ(run_cli("--help", dir).code, 0);
}

TEST(CliTrack, ManifestRecordsConfigAndIsDeterministic) {
  testing::TempDir dir;
  io_detail::write_file(dir / "cfg.json", R"({"max_age": 20})");
  auto run = [&](const std::string& tag) {
    cli::TrackArgs args{kData / "walk.det", kData / "walk.dsft", dir / ("out_" + tag + ".txt"), dir / "cfg.json",
                        dir / ("manifest_" + tag + ".json"), std::string("walk")};
    std::ostringstream out, err;
    EXPECT_EQ(cli::run_track(args, out, err), 0) << err.str();
    return json::parse(io_detail::read_file(dir / ("manifest_" + tag + ".json")));
  };
  json a = run("a");
  json b = run("b");
  EXPECT_EQ(io_detail::read_file(dir / "out_a.txt"), io_detail::read_file(dir / "out_b.txt"));
  EXPECT_EQ(a["config"]["max_age"], 20);
  EXPECT_EQ(a["config"]["lambda"], 0.0);
  EXPECT_EQ(a["sequence"], "walk");
  EXPECT_EQ(a["frame_count"], 20);
  EXPECT_TRUE(a["wall_clock_ms"].is_number());
  EXPECT_TRUE(a["frames_per_second"].is_number());
  for (json* m : {&a, &b}) {
    m->erase("wall_clock_ms");
    m->erase("frames_per_second");
    m->erase("output");
  }
  EXPECT_EQ(a, b);
}

TEST(CliEvaluate, IdenticalResultScoresOne) {
  testing::TempDir dir;
  // Strip the ignored annotation and the extra columns to form a result file.
  const auto gt = read_ground_truth(kData / "walk_gt.txt");
  std::vector<FrameOutput> outs;
  for (const auto& [frame, rows] : gt) {
    FrameOutput fo{frame, {}};
    for (const auto& r : rows) {
      if (r.valid) fo.tracks.push_back({static_cast<std::uint64_t>(r.gt_id), r.bbox});
    }
    outs.push_back(fo);
  }
  write_results(outs, dir / "res.txt");
  const Proc p = run_cli("evaluate --gt " + q(kData / "walk_gt.txt") + " --result " + q(dir / "res.txt"), dir);
  ASSERT_EQ(p.code, 0) << p.err;
  const json report = json::parse(p.out);
  EXPECT_EQ(report["mota"], 1.0);
  EXPECT_EQ(report["id_switches"], 0);
  EXPECT_EQ(report.size(), 8u);
  for (const char* key : {"mota", "motp", "mt", "ml", "id_switches", "fragmentations", "false_positives",
                          "false_negatives"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
}

TEST(CliEvaluate, HandFixtureWithOneSwitch) {
  testing::TempDir dir;
  std::string gt, res;
  for (int f = 1; f <= 6; ++f) {
    gt += std::to_string(f) + ",1," + std::to_string(10 * f) + ",0,10,10,1,1,1\n";
    res += std::to_string(f) + "," + (f < 4 ? "7" : "9") + "," + std::to_string(10 * f) + ",0,10,10,1,-1,-1,-1\n";
    if (f <= 4) {
      gt += std::to_string(f) + ",2,500,0,10,10,1,1,1\n";
      res += std::to_string(f) + ",8,500,0,10,10,1,-1,-1,-1\n";
    }
  }
  io_detail::write_file(dir / "gt.txt", gt);
  io_detail::write_file(dir / "res.txt", res);
  cli::EvaluateArgs args{dir / "gt.txt", dir / "res.txt", dir / "report.json"};
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_evaluate(args, out, err), 0) << err.str();
  const json report = json::parse(io_detail::read_file(dir / "report.json"));
  EXPECT_NEAR(report["mota"].get<double>(), 0.9, 1e-9);
  EXPECT_EQ(report["id_switches"], 1);
  EXPECT_TRUE(out.str().empty());
}

TEST(CliEvaluate, MisalignedFramesAreNotAnError) {
  testing::TempDir dir;
  io_detail::write_file(dir / "gt.txt", "1,1,0,0,10,10\n2,1,0,0,10,10\n");
  io_detail::write_file(dir / "res.txt", "2,1,0,0,10,10,1,-1,-1,-1\n5,1,0,0,10,10,1,-1,-1,-1\n");
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_evaluate({dir / "gt.txt", dir / "res.txt", std::nullopt}, out, err), 0) << err.str();
  const json report = json::parse(out.str());
  EXPECT_EQ(report["false_negatives"], 1);
  EXPECT_EQ(report["false_positives"], 1);
}

TEST(CliEvaluate, ErrorsMapToExitCodes) {
  testing::TempDir dir;
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_evaluate({dir / "none.txt", kData / "small_results.txt", std::nullopt}, out, err), 1);
  io_detail::write_file(dir / "empty.txt", "");
  EXPECT_EQ(cli::run_evaluate({dir / "empty.txt", kData / "small_results.txt", std::nullopt}, out, err), 2);
}

TEST(CliGateCheck, DefaultRunPasses) {
  testing::TempDir dir;
  const Proc p = run_cli("gate-check", dir);
  ASSERT_EQ(p.code, 0) << p.err;
  const json r = json::parse(p.out);
  EXPECT_EQ(r["samples"], 10000);
  EXPECT_GE(r["fraction"].get<double>(), 0.94);
  EXPECT_LE(r["fraction"].get<double>(), 0.96);
  EXPECT_EQ(r["lower"], 0.94);
  EXPECT_EQ(r["upper"], 0.96);
}

TEST(CliGateCheck, SeededAndDeterministic) {
  std::ostringstream a, b, c, err;
  cli::run_gate_check({100, 5}, a, err);
  cli::run_gate_check({100, 5}, b, err);
  cli::run_gate_check({100, 6}, c, err);
  EXPECT_EQ(a.str(), b.str());
  const json ja = json::parse(a.str());
  EXPECT_GT(ja["upper"].get<double>() - ja["lower"].get<double>(), 0.02);
  EXPECT_EQ(json::parse(c.str())["seed"], 6);
}

TEST(CliRender, RectanglesAndColors) {
  testing::TempDir dir;
  io_detail::write_file(dir / "res.txt",
                        "1,1,10,10,20,40,1,-1,-1,-1\n1,2,100,10,20,40,1,-1,-1,-1\n3,1,14,10,20,40,1,-1,-1,-1\n");
  const Proc p = run_cli("render --result " + q(dir / "res.txt") + " --frame-size 640x480 --out-dir " +
                             q(dir / "svg"),
                         dir);
  ASSERT_EQ(p.code, 0) << p.err;
  const std::string f1 = io_detail::read_file(dir / "svg" / "frame_000001.svg");
  const std::string f2 = io_detail::read_file(dir / "svg" / "frame_000002.svg");
  const std::string f3 = io_detail::read_file(dir / "svg" / "frame_000003.svg");
  EXPECT_EQ(count(f1, "class=\"track\""), 2u);
  EXPECT_EQ(count(f2, "class=\"track\""), 0u);
  EXPECT_NE(f2.find("<svg"), std::string::npos);
  EXPECT_NE(f2.find("</svg>"), std::string::npos);
  EXPECT_NE(f1.find("width=\"640\""), std::string::npos);

  const std::regex stroke("data-id=\"1\"[^>]*stroke=\"([^\"]+)\"");
  std::smatch m1, m3;
  ASSERT_TRUE(std::regex_search(f1, m1, stroke));
  ASSERT_TRUE(std::regex_search(f3, m3, stroke));
  EXPECT_EQ(m1[1].str(), m3[1].str());
  EXPECT_EQ(m1[1].str(), color_for_id(1));
}

TEST(CliRender, BadFrameSize) {
  testing::TempDir dir;
  io_detail::write_file(dir / "res.txt", "1,1,10,10,20,40,1,-1,-1,-1\n");
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_render({dir / "res.txt", "640by480", dir / "svg"}, out, err), 2);
  EXPECT_EQ(cli::run_render({dir / "missing.txt", "640x480", dir / "svg"}, out, err), 1);
}

TEST(CliShapes, BuiltInNetwork) {
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_shapes({}, out, err), 0);
  EXPECT_NE(out.str().find("Residual 9\t128x16x8\n"), std::string::npos);
  EXPECT_NE(out.str().find("Dense 10\t128\n"), std::string::npos);
}

TEST(CliShapes, InvalidLayerFile) {
  testing::TempDir dir;
  io_detail::write_file(dir / "layers.json", R"([{"kind": "conv", "output_channels": 0}])");
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_shapes({dir / "layers.json"}, out, err), 2);
  EXPECT_NE(err.str().find("InvalidSpec"), std::string::npos);
}

}  // namespace
}  // namespace cmot
