#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <doctest.h>

#include "dtfusion/pipeline.hpp"
#include "dtfusion/run_format.hpp"
#include "support.hpp"

using namespace dtfusion;
using namespace dtfusion::run;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(DTFUSION_SOURCE_DIR) / "tests" / "data";

std::string raster_bytes(const DepthImage& img) {
  std::ostringstream out(std::ios::binary);
  write_depth_raster(img, out);
  return out.str();
}

DepthImage raster_from(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_depth_raster(in);
}

sim::ScenarioConfig small_config() {
  sim::ScenarioConfig c;
  c.n_vehicles = 4;
  c.duration = 0.5;
  c.gnss_sigma = 0.3;
  c.box_jitter_sigma = 2.0;
  c.merge_prob = 0.5;
  c.overlap_injection = 1;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("golden depth raster") {
  const std::string golden = testing::slurp(kData / "golden_4x2.dpt");
  REQUIRE(golden.size() == 12 + 4 * 4 * 2);
  CHECK(testing::fnv1a(golden) == 0x7b1b10e3e6803496ull);

  const DepthImage img = load_depth_raster(kData / "golden_4x2.dpt");
  CHECK(img.width() == 4);
  CHECK(img.height() == 2);
  CHECK(img.at(0, 0) == 1.0);
  CHECK(img.at(1, 0) == 2.5);
  CHECK(DepthImage::is_no_return(img.at(2, 0)));
  CHECK(img.at(3, 0) == 0.125);
  CHECK(img.at(0, 1) == 1000.0);
  CHECK(img.at(3, 1) == 0.5);
  CHECK(raster_bytes(img) == golden);
}

TEST_CASE("depth raster round trip") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<float> r(0.01f, 500.0f);
  std::vector<double> values(37 * 23);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = i % 7 == 0 ? DepthImage::kNoReturn : r(rng);
  const DepthImage img(37, 23, values);
  const std::string bytes = raster_bytes(img);
  CHECK(bytes.size() == 12 + 4 * values.size());
  CHECK(raster_from(bytes) == img);
  CHECK(raster_bytes(raster_from(bytes)) == bytes);

  testing::TempDir dir("dpt");
  save_depth_raster(img, dir.path() / "x.dpt");
  CHECK(load_depth_raster(dir.path() / "x.dpt") == img);
  CHECK(testing::slurp(dir.path() / "x.dpt") == bytes);
}

TEST_CASE("depth raster rejects malformed input") {
  const std::string golden = testing::slurp(kData / "golden_4x2.dpt");
  CHECK_THROWS_AS(raster_from(""), DataError);
  CHECK_THROWS_AS(raster_from("DPT2" + golden.substr(4)), DataError);
  CHECK_THROWS_AS(raster_from(golden.substr(0, 10)), DataError);
  CHECK_THROWS_AS(raster_from(golden.substr(0, golden.size() - 1)), DataError);
  CHECK_THROWS_AS(raster_from(golden + "x"), DataError);
  std::string nan_raster = golden;
  nan_raster[12] = '\x00', nan_raster[13] = '\x00', nan_raster[14] = '\xc0', nan_raster[15] = '\x7f';
  CHECK_THROWS_AS(raster_from(nan_raster), DataError);
  CHECK_THROWS_AS(load_depth_raster("/nonexistent/dir/x.dpt"), IoError);
}

TEST_CASE("scenario config JSON") {
  sim::ScenarioConfig c = small_config();
  c.placements.push_back({1, 2, 40.0, 20.0, Dimensions{4.0, 1.7, 1.4}, DriverType::aggressive});
  c.lane_changes.push_back({1, 1.0, 2.5, 1});
  c.overlap_injection = 0;
  const std::string text = scenario_config_to_json(c);
  const auto back = scenario_config_from_json(text);
  CHECK(scenario_config_to_json(back) == text);
  CHECK(back.placements.at(0).driver_type == DriverType::aggressive);

  // Missing keys keep their defaults.
  const auto minimal = scenario_config_from_json("{\"duration\": 1.0}");
  CHECK(minimal.lanes == 3);
  CHECK(minimal.num_frames() == 10);

  auto field_of = [](const std::string& t) -> std::string {
    try {
      scenario_config_from_json(t);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return "";
  };
  CHECK(field_of("{\"lanes\": 0}") == "lanes");
  CHECK(field_of("{\"lanes\": \"three\"}") == "lanes");
  CHECK(field_of("{\"lanes\": 2.5}") == "lanes");
  CHECK(field_of("{\"seed\": -1}") == "seed");
  CHECK(field_of("{\"intrinsics\": {\"f\": \"x\"}}") == "intrinsics.f");
  CHECK(field_of("{\"camera_mount\": {\"up\": \"high\"}}") == "camera_mount.up");
  CHECK(field_of("{\"drop_prob\": 2}") == "drop_prob");
  CHECK(field_of("[1, 2]") == "<document>");
  CHECK(field_of("{oops") == "<document>");
}

TEST_CASE("frame JSON round trip") {
  const auto sc = sim::generate_scenario(small_config());
  for (std::size_t i = 0; i < sc.steps.size(); ++i) {
    const Frame f = sim::build_frame(sc, i);
    const std::string text = frame_to_json(f);
    const Frame back = frame_from_json(text);
    CHECK(frame_to_json(back) == text);
    CHECK(back.detections == f.detections);
    CHECK(back.gt_boxes == f.gt_boxes);
    CHECK(back.ego_pose.rotation == f.ego_pose.rotation);
    CHECK_FALSE(back.depth.has_value());
  }
  CHECK_THROWS_AS(frame_from_json("{}", "frames/000000.json"), DataError);
  try {
    frame_from_json("not json", "frames/000042.json");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("000042.json") != std::string::npos);
  }
}

TEST_CASE("run directory write and load") {
  testing::TempDir dir("rundir");
  const auto cfg = small_config();
  const std::size_t n = write_run_directory(cfg, dir.path() / "a");
  CHECK(n == static_cast<std::size_t>(cfg.num_frames()));
  CHECK(count_frames(dir.path() / "a") == n);
  CHECK(fs::exists(dir.path() / "a" / "scenario.json"));
  CHECK(fs::exists(dir.path() / "a" / "frames" / "000000.dpt"));
  CHECK(scenario_config_from_json(testing::slurp(dir.path() / "a" / "scenario.json")).seed == cfg.seed);

  const auto sc = sim::generate_scenario(cfg);
  for (std::size_t i = 0; i < n; ++i) {
    const Frame f = load_frame(dir.path() / "a", static_cast<std::int64_t>(i), true);
    const Frame mem = sim::build_frame(sc, i);
    CHECK(frame_to_json(f) == frame_to_json(mem));
    REQUIRE(f.depth.has_value());
    // float32 on disk: within half an ulp at float precision.
    for (std::size_t k = 0; k < f.depth->ranges().size(); ++k) {
      const double a = f.depth->ranges()[k], b = mem.depth->ranges()[k];
      if (DepthImage::is_no_return(b)) {
        CHECK(DepthImage::is_no_return(a));
      } else {
        CHECK(std::abs(a - b) <= 1e-6 * b);
      }
    }
  }

  // Same config twice: byte-identical directories.
  write_run_directory(cfg, dir.path() / "b");
  for (const char* rel : {"scenario.json", "frames/000000.json", "frames/000000.dpt", "frames/000004.dpt"}) {
    CHECK(testing::slurp(dir.path() / "a" / rel) == testing::slurp(dir.path() / "b" / rel));
  }

  fs::remove(frame_depth_path(dir.path() / "a", 2));
  CHECK_NOTHROW(load_frame(dir.path() / "a", 2, false));
  try {
    load_frame(dir.path() / "a", 2, true);
    FAIL("loaded a frame without its raster");
  } catch (const IoError& e) {
    CHECK(e.path().find("000002.dpt") != std::string::npos);
  }
  CHECK_THROWS_AS(count_frames(dir.path() / "nothing"), IoError);
}

TEST_CASE("results CSV") {
  std::vector<ResultRow> rows(4);
  rows[0] = {0, fusion::Mode::fused, fusion::Matched{2, -0.125}, 0.75};
  rows[1] = {1, fusion::Mode::fused, fusion::NoMatch{fusion::NoMatchReason::anchor_outside_all}, 0.0};
  rows[2] = {2, fusion::Mode::fused, fusion::NoMatch{fusion::NoMatchReason::behind_camera}, std::nullopt};
  rows[3] = {3, fusion::Mode::fused, fusion::Matched{0, 1.0 / 3.0}, 1.0};
  std::ostringstream out;
  write_results_csv(rows, out);
  const std::string text = out.str();
  CHECK(text.rfind(std::string(kResultsHeader) + "\n", 0) == 0);
  CHECK(text.find("0,fused,1,2,-0.125,0.75,\n") != std::string::npos);
  CHECK(text.find("1,fused,0,,,0,anchor_outside_all\n") != std::string::npos);
  CHECK(text.find("2,fused,0,,,,behind_camera\n") != std::string::npos);

  std::istringstream in(text);
  const auto back = read_results_csv(in);
  REQUIRE(back.size() == 4);
  CHECK(std::get<fusion::Matched>(back[3].outcome).delta_d == 1.0 / 3.0);
  CHECK(back[2].iou_with_truth == std::nullopt);
  std::ostringstream again;
  write_results_csv(back, again);
  CHECK(again.str() == text);

  const auto recs = to_eval_records(back);
  CHECK(recs.size() == 3);

  auto bad = [](const std::string& t) {
    std::istringstream s(t);
    return read_results_csv(s);
  };
  const std::string h = std::string(kResultsHeader) + "\n";
  CHECK_THROWS_AS(bad(""), DataError);
  CHECK_THROWS_AS(bad("frame,mode\n"), DataError);
  CHECK_THROWS_AS(bad(h + "0,fused,1,2,0.5\n"), DataError);
  CHECK_THROWS_AS(bad(h + "0,other,1,2,0.5,0.5,\n"), DataError);
  CHECK_THROWS_AS(bad(h + "0,fused,1,2,0.5,1.5,\n"), DataError);
  CHECK_THROWS_AS(bad(h + "0,fused,0,,,0,bogus\n"), DataError);
}

TEST_CASE("trajectory CSV") {
  metrics::TrajectoryLog log{{{0.0, 27.0, 30.5, 20.0}, {0.1, 26.6, 29.8, 20.0}}};
  std::ostringstream out;
  write_trajectory_csv(log, out);
  CHECK(out.str() == "t,ego_speed,gap_to_lead,lead_speed\n0,27,30.5,20\n0.1,26.6,29.8,20\n");
  std::istringstream in(out.str());
  const auto back = read_trajectory_csv(in);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[1].ego_speed == 26.6);
  std::istringstream bad("t,ego_speed,gap_to_lead,lead_speed\n0,1,-2,3\n");
  CHECK_THROWS_AS(read_trajectory_csv(bad), DataError);
}

TEST_CASE("format_double") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1 + 0.2) == "0.30000000000000004");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(3.0) == "3");
}

TEST_CASE("evaluate_frame with class filtering keeps original box indices") {
  Frame f;
  f.ego_pose = geometry::CameraPose::make(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
  f.intrinsics = testing::square_camera();
  f.twin.push_back({3, 0.0, {0.0, 0.0, 20.0}, 0.0, DriverType::normal});
  f.detections = {testing::box(300, 300, 340, 340, 0), testing::box(310, 310, 330, 330, 2)};
  f.gt_boxes[3] = testing::box(310, 310, 330, 330);
  auto row = evaluate_frame(f, 3, fusion::Mode::baseline, {}, {2});
  CHECK(std::get<fusion::Matched>(row.outcome).box_index == 1);
  CHECK(row.iou_with_truth == 1.0);
  row = evaluate_frame(f, 3, fusion::Mode::baseline, {}, {5});
  CHECK(std::get<fusion::NoMatch>(row.outcome).reason == fusion::NoMatchReason::no_detections);
  CHECK(row.iou_with_truth == 0.0);
  f.gt_boxes.clear();
  CHECK_FALSE(evaluate_frame(f, 3, fusion::Mode::baseline, {}).iou_with_truth.has_value());
}
