#include <cstdlib>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "dtfusion/commands.hpp"
#include "dtfusion/run_format.hpp"
#include "support.hpp"

using namespace dtfusion;
using namespace dtfusion::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = fs::path(DTFUSION_SOURCE_DIR) / "configs";

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  testing::spit(p, text);
  return p;
}

const char* kQuiet = R"({"n_vehicles": 3, "duration": 1.5, "seed": 4})";

int run_binary(const std::string& args) {
  const std::string cmd = std::string("\"") + DTFUSION_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("gen writes a dense run directory") {
  testing::TempDir tmp("cli");
  const auto cfg = write_config(tmp.path(), "c.json", kQuiet);
  std::ostringstream err;
  REQUIRE(cmd_gen({cfg, tmp.path() / "run"}, err) == kExitOk);
  CHECK(run::count_frames(tmp.path() / "run") == 15);
  for (int i = 0; i < 15; ++i) CHECK(fs::exists(run::frame_depth_path(tmp.path() / "run", i)));

  REQUIRE(cmd_gen({cfg, tmp.path() / "again"}, err) == kExitOk);
  for (const auto& entry : fs::recursive_directory_iterator(tmp.path() / "run")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), tmp.path() / "run");
    CHECK(testing::slurp(entry.path()) == testing::slurp(tmp.path() / "again" / rel));
  }
}

TEST_CASE("gen error codes") {
  testing::TempDir tmp("cli");
  std::ostringstream err;
  CHECK(cmd_gen({write_config(tmp.path(), "bad.json", R"({"lanes": 0})"), tmp.path() / "x"}, err) == kExitUsage);
  CHECK(err.str().find("lanes") != std::string::npos);

  err.str("");
  CHECK(cmd_gen({tmp.path() / "missing.json", tmp.path() / "x"}, err) == kExitUsage);
  CHECK(err.str().find("--config") != std::string::npos);

  testing::spit(tmp.path() / "blocker", "file, not a directory");
  err.str("");
  const auto cfg = write_config(tmp.path(), "c.json", kQuiet);
  CHECK(cmd_gen({cfg, tmp.path() / "blocker" / "run"}, err) == kExitData);
}

TEST_CASE("run on a noise-free directory matches every frame exactly") {
  testing::TempDir tmp("cli");
  std::ostringstream err;
  REQUIRE(cmd_gen({kConfigs / "zero_noise.json", tmp.path() / "run"}, err) == kExitOk);
  RunOptions opts;
  opts.frames = tmp.path() / "run";
  opts.target = 1;
  opts.out = tmp.path() / "fused.csv";
  REQUIRE(cmd_run(opts, err) == kExitOk);

  std::ifstream in(opts.out);
  const auto rows = run::read_results_csv(in);
  CHECK(rows.size() == 250);
  for (const auto& r : rows) {
    if (!r.iou_with_truth) continue;
    const auto* m = std::get_if<fusion::Matched>(&r.outcome);
    REQUIRE(m != nullptr);
    CHECK(*r.iou_with_truth == 1.0);
    // The on-disk raster is float32.
    CHECK(std::abs(m->delta_d) < 1e-4);
  }

  // Deterministic output.
  RunOptions again = opts;
  again.out = tmp.path() / "fused2.csv";
  REQUIRE(cmd_run(again, err) == kExitOk);
  CHECK(testing::slurp(opts.out) == testing::slurp(again.out));
}

TEST_CASE("run error codes and baseline without rasters") {
  testing::TempDir tmp("cli");
  std::ostringstream err;
  REQUIRE(cmd_gen({write_config(tmp.path(), "c.json", kQuiet), tmp.path() / "run"}, err) == kExitOk);

  RunOptions opts;
  opts.frames = tmp.path() / "run";
  opts.target = 1;
  opts.out = tmp.path() / "r.csv";

  RunOptions unknown = opts;
  unknown.target = 42;
  CHECK(cmd_run(unknown, err) == kExitUsage);

  RunOptions bad_th = opts;
  bad_th.th = 1.5;
  CHECK(cmd_run(bad_th, err) == kExitUsage);

  RunOptions bad_mode = opts;
  bad_mode.mode = "magic";
  CHECK(cmd_run(bad_mode, err) == kExitUsage);

  fs::remove(run::frame_depth_path(opts.frames, 3));
  err.str("");
  CHECK(cmd_run(opts, err) == kExitData);
  CHECK(err.str().find("000003.dpt") != std::string::npos);

  for (int i = 0; i < 15; ++i) fs::remove(run::frame_depth_path(opts.frames, i));
  RunOptions base = opts;
  base.mode = "baseline";
  CHECK(cmd_run(base, err) == kExitOk);
  CHECK(lines(testing::slurp(base.out)).size() == 16);

  RunOptions nowhere = opts;
  nowhere.frames = tmp.path() / "nothing";
  CHECK(cmd_run(nowhere, err) == kExitData);

  testing::spit(run::frame_json_path(opts.frames, 0), "{ broken");
  err.str("");
  CHECK(cmd_run(base, err) == kExitData);
  CHECK(err.str().find("000000.json") != std::string::npos);
}

TEST_CASE("run with external detections and class filter") {
  testing::TempDir tmp("cli");
  std::ostringstream err;
  REQUIRE(cmd_gen({kConfigs / "zero_noise.json", tmp.path() / "run"}, err) == kExitOk);
  // Only frame 0 gets detections, a non-vehicle class box over the target.
  const Frame f0 = run::load_frame(tmp.path() / "run", 0, false);
  const auto gt = f0.gt_boxes.at(1);
  BoundingBox other = gt;
  other.class_id = 9;
  testing::spit(tmp.path() / "d.jsonl", "{\"frame\":0,\"boxes\":[" +
                                            json{{"x_min", other.x_min}, {"y_min", other.y_min}, {"x_max", other.x_max},
                                                 {"y_max", other.y_max}, {"class_id", 9}}
                                                .dump() +
                                            "," +
                                            json{{"x_min", gt.x_min}, {"y_min", gt.y_min}, {"x_max", gt.x_max},
                                                 {"y_max", gt.y_max}, {"class_id", 2}}
                                                .dump() +
                                            "]}\n");
  RunOptions opts;
  opts.frames = tmp.path() / "run";
  opts.target = 1;
  opts.detections = tmp.path() / "d.jsonl";
  opts.classes = {2};
  opts.out = tmp.path() / "r.csv";
  REQUIRE(cmd_run(opts, err) == kExitOk);
  const auto rows = lines(testing::slurp(opts.out));
  REQUIRE(rows.size() == 251);
  CHECK(rows[1].rfind("0,fused,1,1,", 0) == 0);
  CHECK(rows[2] == "1,fused,0,,,0,no_detections");

  testing::spit(tmp.path() / "bad.jsonl", "{\"frame\":0}\n");
  opts.detections = tmp.path() / "bad.jsonl";
  CHECK(cmd_run(opts, err) == kExitData);
}

TEST_CASE("eval") {
  testing::TempDir tmp("cli");
  const std::string h = std::string(run::kResultsHeader) + "\n";
  testing::spit(tmp.path() / "b.csv", h + "0,baseline,1,0,0,0.9,\n1,baseline,1,0,0,0.65,\n");
  testing::spit(tmp.path() / "f.csv", h + "0,fused,1,0,0.1,0.9,\n1,fused,1,1,0.2,0.75,\n2,fused,0,,,,behind_camera\n");
  std::ostringstream err;

  EvalOptions one{{tmp.path() / "f.csv"}, "0.5:0.9:0.1", tmp.path() / "c1.csv"};
  REQUIRE(cmd_eval(one, err) == kExitOk);
  CHECK(testing::slurp(one.out) == "tau,accuracy_fused\n0.5,1\n0.6,1\n0.7,1\n0.8,0.5\n0.9,0.5\n");

  EvalOptions both{{tmp.path() / "b.csv", tmp.path() / "f.csv"}, "0.5:0.9:0.1", tmp.path() / "c2.csv"};
  REQUIRE(cmd_eval(both, err) == kExitOk);
  const auto l = lines(testing::slurp(both.out));
  CHECK(l[0] == "tau,accuracy_baseline,accuracy_fused");
  CHECK(l[3] == "0.7,0.5,1");
  CHECK(l.size() == 6);

  EvalOptions dup{{tmp.path() / "f.csv", tmp.path() / "f.csv"}, "0.5:0.5:0.1", tmp.path() / "c3.csv"};
  REQUIRE(cmd_eval(dup, err) == kExitOk);
  CHECK(lines(testing::slurp(dup.out))[0] == "tau,accuracy_fused,accuracy_fused_2");

  testing::spit(tmp.path() / "empty.csv", "");
  testing::spit(tmp.path() / "header.csv", h);
  CHECK(cmd_eval({{tmp.path() / "empty.csv"}, "0.5:0.9:0.1", tmp.path() / "x.csv"}, err) == kExitUsage);
  CHECK(cmd_eval({{tmp.path() / "header.csv"}, "0.5:0.9:0.1", tmp.path() / "x.csv"}, err) == kExitUsage);
  CHECK(cmd_eval({{tmp.path() / "f.csv"}, "0.5:0.9", tmp.path() / "x.csv"}, err) == kExitUsage);
  CHECK(cmd_eval({{tmp.path() / "f.csv"}, "0:0.5:0.1", tmp.path() / "x.csv"}, err) == kExitUsage);
  CHECK(cmd_eval({{tmp.path() / "missing.csv"}, "0.5:0.9:0.1", tmp.path() / "x.csv"}, err) == kExitData);
  testing::spit(tmp.path() / "junk.csv", "frame,mode\n");
  CHECK(cmd_eval({{tmp.path() / "junk.csv"}, "0.5:0.9:0.1", tmp.path() / "x.csv"}, err) == kExitData);
}

TEST_CASE("safety") {
  testing::TempDir tmp("cli");
  std::ostringstream err;
  SafetyOptions zero{kConfigs / "cutin.json", 0.0, tmp.path() / "s0.json", tmp.path() / "logs"};
  REQUIRE(cmd_safety(zero, err) == kExitOk);
  const json s0 = json::parse(testing::slurp(zero.out));
  CHECK(s0["advisory"] == s0["no_advisory"]);
  CHECK(s0["seed"] == 11);
  CHECK(testing::slurp(tmp.path() / "logs" / "advisory.csv") == testing::slurp(tmp.path() / "logs" / "no_advisory.csv"));

  SafetyOptions two{kConfigs / "cutin.json", 2.0, tmp.path() / "s2.json", std::nullopt};
  REQUIRE(cmd_safety(two, err) == kExitOk);
  const json s2 = json::parse(testing::slurp(two.out));
  CHECK(s2["advisory"]["min_ttc"].get<double>() > s2["no_advisory"]["min_ttc"].get<double>());
  for (const char* k : {"speed_variance", "avg_ttc", "min_ttc"}) {
    CHECK(s2["advisory"].contains(k));
    CHECK(s2["no_advisory"].contains(k));
  }

  const auto plain = write_config(tmp.path(), "plain.json", kQuiet);
  CHECK(cmd_safety({plain, 2.0, tmp.path() / "s.json", std::nullopt}, err) == kExitUsage);
  CHECK(cmd_safety({kConfigs / "cutin.json", -1.0, tmp.path() / "s.json", std::nullopt}, err) == kExitUsage);
}

TEST_CASE("binary argument handling") {
  CHECK(run_binary("--help") == 0);
  CHECK(run_binary("") == 1);
  CHECK(run_binary("frobnicate") == 1);
  CHECK(run_binary("gen --config") == 1);
  CHECK(run_binary("run --frames x --target 1 --out y --mode magic") == 1);
  CHECK(run_binary("run --frames x --target one --out y") == 1);
  CHECK(run_binary("eval --results /nonexistent.csv --out /tmp/x.csv") == 2);

  testing::TempDir tmp("cli");
  const std::string cfg = (kConfigs / "cutin.json").string();
  CHECK(run_binary("safety --scenario \"" + cfg + "\" --lead-time 2 --out \"" + (tmp.path() / "s.json").string() +
                   "\"") == 0);
  CHECK(fs::exists(tmp.path() / "s.json"));
}
