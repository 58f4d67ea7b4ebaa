#include "dtfusion/run_format.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace dtfusion::run {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "raster I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 4> kDepthMagic{'D', 'P', 'T', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const auto bytes = std::bit_cast<std::array<char, 4>>(v);
  out.write(bytes.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<char, 4> bytes{};
  in.read(bytes.data(), 4);
  return std::bit_cast<std::uint32_t>(bytes);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

// Reads `key` from `obj` into `out` if present; wrong types raise a
// ConfigError naming `prefix + key`.
template <typename T>
void read_field(const json& obj, const char* key, T& out, const std::string& prefix = "") {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  const std::string field = prefix + key;
  try {
    if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::int64_t>) {
      if (!it->is_number_integer()) throw ConfigError(field, "must be an integer");
      out = it->get<T>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!it->is_number_unsigned()) throw ConfigError(field, "must be a non-negative integer");
      out = it->get<T>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw ConfigError(field, "must be a number");
      out = it->get<double>();
    } else {
      out = it->get<T>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(field, e.what());
  }
}

json intrinsics_json(const geometry::CameraIntrinsics& in) {
  return {{"f", in.focal}, {"dx", in.pixel_dx}, {"dy", in.pixel_dy}, {"u0", in.u0},
          {"v0", in.v0},   {"width", in.width}, {"height", in.height}};
}

geometry::CameraIntrinsics intrinsics_from(const json& j, const std::string& prefix) {
  geometry::CameraIntrinsics in;
  read_field(j, "f", in.focal, prefix);
  read_field(j, "dx", in.pixel_dx, prefix);
  read_field(j, "dy", in.pixel_dy, prefix);
  read_field(j, "u0", in.u0, prefix);
  read_field(j, "v0", in.v0, prefix);
  read_field(j, "width", in.width, prefix);
  read_field(j, "height", in.height, prefix);
  return in;
}

json dims_json(const Dimensions& d) { return json::array({d.length, d.width, d.height}); }

Dimensions dims_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("dims must be [length, width, height]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json point_json(const geometry::WorldPoint& p) { return json::array({p.x, p.y, p.z}); }

geometry::WorldPoint point_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("point must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json box_json(const BoundingBox& b) {
  json j{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}, {"class_id", b.class_id}};
  if (b.score) j["score"] = *b.score;
  return j;
}

BoundingBox box_from(const json& j, BoxSource source) {
  BoundingBox b;
  b.x_min = j.at("x_min").get<double>();
  b.y_min = j.at("y_min").get<double>();
  b.x_max = j.at("x_max").get<double>();
  b.y_max = j.at("y_max").get<double>();
  b.class_id = j.at("class_id").get<int>();
  if (j.contains("score")) b.score = j.at("score").get<double>();
  b.source = source;
  if (!b.is_valid()) throw DataError("invalid box");
  return b;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw DataError(where + ": '" + s + "' is not a number");
  }
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& where) {
  std::int64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw DataError(where + ": '" + s + "' is not an integer");
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

// ---- depth raster ----------------------------------------------------------

void write_depth_raster(const DepthImage& img, std::ostream& out) {
  out.write(kDepthMagic.data(), kDepthMagic.size());
  put_u32(out, static_cast<std::uint32_t>(img.width()));
  put_u32(out, static_cast<std::uint32_t>(img.height()));
  std::vector<float> buf(img.ranges().begin(), img.ranges().end());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

void save_depth_raster(const DepthImage& img, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  write_depth_raster(img, out);
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

DepthImage read_depth_raster(std::istream& in, const std::string& name) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kDepthMagic) throw DataError(name + ": not a DPT1 depth raster");
  const std::uint32_t w = get_u32(in);
  const std::uint32_t h = get_u32(in);
  if (!in) throw DataError(name + ": truncated header");
  const std::size_t count = static_cast<std::size_t>(w) * h;
  std::vector<float> buf(count);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float)) throw DataError(name + ": truncated raster");
  if (in.peek() != std::char_traits<char>::eof()) throw DataError(name + ": trailing bytes after raster");
  try {
    return DepthImage(static_cast<int>(w), static_cast<int>(h), std::vector<double>(buf.begin(), buf.end()));
  } catch (const DataError& e) {
    throw DataError(name + ": " + e.what());
  }
}

DepthImage load_depth_raster(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open depth raster");
  return read_depth_raster(in, path.string());
}

// ---- scenario config -------------------------------------------------------

std::string scenario_config_to_json(const sim::ScenarioConfig& c) {
  json j;
  j["lanes"] = c.lanes;
  j["lane_width"] = c.lane_width;
  j["n_vehicles"] = c.n_vehicles;
  j["ego_index"] = c.ego_index;
  j["ego_lane"] = c.ego_lane;
  j["ego_speed"] = c.ego_speed;
  j["camera_mount"] = {{"forward", c.camera_mount.forward},
                       {"left", c.camera_mount.left},
                       {"up", c.camera_mount.up},
                       {"pitch", c.camera_mount.pitch}};
  j["intrinsics"] = intrinsics_json(c.intrinsics);
  j["duration"] = c.duration;
  j["frame_rate"] = c.frame_rate;
  j["gnss_sigma"] = c.gnss_sigma;
  j["box_jitter_sigma"] = c.box_jitter_sigma;
  j["drop_prob"] = c.drop_prob;
  j["merge_prob"] = c.merge_prob;
  j["overlap_injection"] = c.overlap_injection;
  j["twin_latency"] = c.twin_latency;
  j["seed"] = c.seed;
  j["spawn_min"] = c.spawn_min;
  j["spawn_max"] = c.spawn_max;
  j["speed_spread"] = c.speed_spread;
  j["overlap_far_min"] = c.overlap_far_min;
  j["overlap_far_max"] = c.overlap_far_max;
  j["overlap_ratio_min"] = c.overlap_ratio_min;
  j["overlap_ratio_max"] = c.overlap_ratio_max;
  j["overlap_visible_min"] = c.overlap_visible_min;
  j["overlap_visible_max"] = c.overlap_visible_max;
  j["placements"] = json::array();
  for (const auto& p : c.placements) {
    json jp{{"id", p.id}, {"lane", p.lane}, {"x", p.x}, {"speed", p.speed}};
    if (p.dims) jp["dims"] = dims_json(*p.dims);
    if (p.driver_type) jp["driver_type"] = std::string(to_string(*p.driver_type));
    j["placements"].push_back(std::move(jp));
  }
  j["lane_changes"] = json::array();
  for (const auto& lc : c.lane_changes) {
    j["lane_changes"].push_back(
        {{"vehicle", lc.vehicle}, {"start", lc.start}, {"duration", lc.duration}, {"to_lane", lc.to_lane}});
  }
  j["policy"] = {{"reaction_delay", c.policy.reaction_delay}, {"brake_decel", c.policy.brake_decel}};
  return j.dump(2) + "\n";
}

sim::ScenarioConfig scenario_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  if (!j.is_object()) throw ConfigError("<document>", "expected a JSON object");

  sim::ScenarioConfig c;
  read_field(j, "lanes", c.lanes);
  read_field(j, "lane_width", c.lane_width);
  read_field(j, "n_vehicles", c.n_vehicles);
  read_field(j, "ego_index", c.ego_index);
  read_field(j, "ego_lane", c.ego_lane);
  read_field(j, "ego_speed", c.ego_speed);
  if (const auto m = j.find("camera_mount"); m != j.end()) {
    if (!m->is_object()) throw ConfigError("camera_mount", "must be an object");
    read_field(*m, "forward", c.camera_mount.forward, "camera_mount.");
    read_field(*m, "left", c.camera_mount.left, "camera_mount.");
    read_field(*m, "up", c.camera_mount.up, "camera_mount.");
    read_field(*m, "pitch", c.camera_mount.pitch, "camera_mount.");
  }
  if (const auto in = j.find("intrinsics"); in != j.end()) {
    if (!in->is_object()) throw ConfigError("intrinsics", "must be an object");
    c.intrinsics = intrinsics_from(*in, "intrinsics.");
  }
  read_field(j, "duration", c.duration);
  read_field(j, "frame_rate", c.frame_rate);
  read_field(j, "gnss_sigma", c.gnss_sigma);
  read_field(j, "box_jitter_sigma", c.box_jitter_sigma);
  read_field(j, "drop_prob", c.drop_prob);
  read_field(j, "merge_prob", c.merge_prob);
  read_field(j, "overlap_injection", c.overlap_injection);
  read_field(j, "twin_latency", c.twin_latency);
  read_field(j, "seed", c.seed);
  read_field(j, "spawn_min", c.spawn_min);
  read_field(j, "spawn_max", c.spawn_max);
  read_field(j, "speed_spread", c.speed_spread);
  read_field(j, "overlap_far_min", c.overlap_far_min);
  read_field(j, "overlap_far_max", c.overlap_far_max);
  read_field(j, "overlap_ratio_min", c.overlap_ratio_min);
  read_field(j, "overlap_ratio_max", c.overlap_ratio_max);
  read_field(j, "overlap_visible_min", c.overlap_visible_min);
  read_field(j, "overlap_visible_max", c.overlap_visible_max);
  if (const auto ps = j.find("placements"); ps != j.end()) {
    if (!ps->is_array()) throw ConfigError("placements", "must be an array");
    for (const auto& jp : *ps) {
      sim::VehiclePlacement p;
      read_field(jp, "id", p.id, "placements.");
      read_field(jp, "lane", p.lane, "placements.");
      read_field(jp, "x", p.x, "placements.");
      read_field(jp, "speed", p.speed, "placements.");
      try {
        if (jp.contains("dims")) p.dims = dims_from(jp.at("dims"));
        if (jp.contains("driver_type")) p.driver_type = driver_type_from_string(jp.at("driver_type").get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError("placements", e.what());
      }
      c.placements.push_back(p);
    }
  }
  if (const auto lcs = j.find("lane_changes"); lcs != j.end()) {
    if (!lcs->is_array()) throw ConfigError("lane_changes", "must be an array");
    for (const auto& jl : *lcs) {
      sim::LaneChange lc;
      read_field(jl, "vehicle", lc.vehicle, "lane_changes.");
      read_field(jl, "start", lc.start, "lane_changes.");
      read_field(jl, "duration", lc.duration, "lane_changes.");
      read_field(jl, "to_lane", lc.to_lane, "lane_changes.");
      c.lane_changes.push_back(lc);
    }
  }
  if (const auto p = j.find("policy"); p != j.end()) {
    read_field(*p, "reaction_delay", c.policy.reaction_delay, "policy.");
    read_field(*p, "brake_decel", c.policy.brake_decel, "policy.");
  }
  c.validate();
  return c;
}

sim::ScenarioConfig load_scenario_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_config_from_json(ss.str());
}

// ---- frames ----------------------------------------------------------------

std::string frame_to_json(const Frame& f) {
  json j;
  j["index"] = f.index;
  j["timestamp"] = f.timestamp;
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({f.ego_pose.rotation(r, 0), f.ego_pose.rotation(r, 1), f.ego_pose.rotation(r, 2)});
  }
  j["ego_pose"] = {{"rotation", rot},
                   {"translation", {f.ego_pose.translation.x(), f.ego_pose.translation.y(), f.ego_pose.translation.z()}}};
  j["intrinsics"] = intrinsics_json(f.intrinsics);
  j["vehicles"] = json::array();
  for (const auto& v : f.vehicles) {
    j["vehicles"].push_back({{"id", v.id},
                             {"position", point_json(v.position)},
                             {"heading", v.heading},
                             {"speed", v.speed},
                             {"dims", dims_json(v.dims)},
                             {"driver_type", std::string(to_string(v.driver_type))}});
  }
  j["gt_boxes"] = json::array();
  for (const auto& [id, b] : f.gt_boxes) {
    json jb = box_json(b);
    jb["vehicle_id"] = id;
    j["gt_boxes"].push_back(std::move(jb));
  }
  j["detections"] = json::array();
  for (const auto& b : f.detections) j["detections"].push_back(box_json(b));
  j["twin"] = json::array();
  for (const auto& t : f.twin) {
    j["twin"].push_back({{"vehicle_id", t.vehicle_id},
                         {"report_time", t.report_time},
                         {"position", point_json(t.position)},
                         {"speed", t.speed},
                         {"driver_type", std::string(to_string(t.driver_type))}});
  }
  return j.dump(1) + "\n";
}

Frame frame_from_json(const std::string& text, const std::string& name) {
  try {
    const json j = json::parse(text);
    Frame f;
    f.index = j.at("index").get<std::int64_t>();
    f.timestamp = j.at("timestamp").get<double>();
    const auto& pose = j.at("ego_pose");
    Eigen::Matrix3d rot;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) rot(r, c) = pose.at("rotation").at(r).at(c).get<double>();
    }
    const auto& tr = pose.at("translation");
    f.ego_pose = geometry::CameraPose::make(rot, {tr.at(0).get<double>(), tr.at(1).get<double>(), tr.at(2).get<double>()});
    f.intrinsics = intrinsics_from(j.at("intrinsics"), "intrinsics.");
    f.intrinsics.validate();
    for (const auto& jv : j.at("vehicles")) {
      VehicleState v;
      v.id = jv.at("id").get<VehicleId>();
      v.position = point_from(jv.at("position"));
      v.heading = jv.at("heading").get<double>();
      v.speed = jv.at("speed").get<double>();
      v.dims = dims_from(jv.at("dims"));
      v.driver_type = driver_type_from_string(jv.at("driver_type").get<std::string>());
      f.vehicles.push_back(v);
    }
    for (const auto& jb : j.at("gt_boxes")) {
      f.gt_boxes.emplace(jb.at("vehicle_id").get<VehicleId>(), box_from(jb, BoxSource::ground_truth));
    }
    for (const auto& jb : j.at("detections")) f.detections.push_back(box_from(jb, BoxSource::detector));
    for (const auto& jt : j.at("twin")) {
      TwinRecord t;
      t.vehicle_id = jt.at("vehicle_id").get<VehicleId>();
      t.report_time = jt.at("report_time").get<double>();
      t.position = point_from(jt.at("position"));
      t.speed = jt.at("speed").get<double>();
      t.driver_type = driver_type_from_string(jt.at("driver_type").get<std::string>());
      f.twin.push_back(t);
    }
    return f;
  } catch (const json::exception& e) {
    throw DataError(name + ": " + e.what());
  } catch (const Error& e) {
    throw DataError(name + ": " + e.what());
  }
}

fs::path frame_json_path(const fs::path& dir, std::int64_t index) {
  std::ostringstream name;
  name << std::setw(6) << std::setfill('0') << index << ".json";
  return dir / "frames" / name.str();
}

fs::path frame_depth_path(const fs::path& dir, std::int64_t index) {
  std::ostringstream name;
  name << std::setw(6) << std::setfill('0') << index << ".dpt";
  return dir / "frames" / name.str();
}

std::size_t write_run_directory(const sim::ScenarioConfig& cfg, const fs::path& dir) {
  const sim::Scenario sc = sim::generate_scenario(cfg);
  std::error_code ec;
  fs::create_directories(dir / "frames", ec);
  if (ec) throw IoError((dir / "frames").string(), ec.message());

  write_text(dir / "scenario.json", scenario_config_to_json(cfg));
  for (std::size_t i = 0; i < sc.steps.size(); ++i) {
    const Frame f = sim::build_frame(sc, i);
    write_text(frame_json_path(dir, f.index), frame_to_json(f));
    save_depth_raster(*f.depth, frame_depth_path(dir, f.index));
  }
  return sc.steps.size();
}

std::size_t count_frames(const fs::path& dir) {
  if (!fs::is_directory(dir / "frames")) throw IoError((dir / "frames").string(), "missing frames directory");
  std::size_t n = 0;
  while (fs::exists(frame_json_path(dir, static_cast<std::int64_t>(n)))) ++n;
  return n;
}

Frame load_frame(const fs::path& dir, std::int64_t index, bool with_depth) {
  const fs::path meta = frame_json_path(dir, index);
  Frame f = frame_from_json(read_text(meta), meta.string());
  if (f.index != index) throw DataError(meta.string() + ": index field does not match file name");
  if (with_depth) {
    const fs::path dpt = frame_depth_path(dir, index);
    if (!fs::exists(dpt)) throw IoError(dpt.string(), "missing depth raster");
    f.depth = load_depth_raster(dpt);
    if (f.depth->width() != f.intrinsics.width || f.depth->height() != f.intrinsics.height) {
      throw DataError(dpt.string() + ": raster size does not match the frame intrinsics");
    }
  }
  return f;
}

// ---- results CSV -------------------------------------------------------------

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.frame << ',' << fusion::to_string(r.mode) << ',';
    if (const auto* m = std::get_if<fusion::Matched>(&r.outcome)) {
      out << "1," << m->box_index << ',' << format_double(m->delta_d) << ',';
    } else {
      out << "0,,,";
    }
    if (r.iou_with_truth) out << format_double(*r.iou_with_truth);
    out << ',';
    if (const auto* nm = std::get_if<fusion::NoMatch>(&r.outcome)) out << fusion::to_string(nm->reason);
    out << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(name + ": empty results file");
  strip_cr(line);
  if (line != kResultsHeader) throw DataError(name + ": unexpected header '" + line + "'");

  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto cells = split_csv(line);
    if (cells.size() != 7) throw DataError(where + ": expected 7 columns");
    ResultRow r;
    r.frame = parse_int(cells[0], where);
    try {
      r.mode = fusion::mode_from_string(cells[1]);
    } catch (const ConfigError&) {
      throw DataError(where + ": unknown mode '" + cells[1] + "'");
    }
    if (cells[2] == "1") {
      r.outcome = fusion::Matched{static_cast<std::size_t>(parse_int(cells[3], where)), parse_double(cells[4], where)};
    } else if (cells[2] == "0") {
      fusion::NoMatch nm;
      if (cells[6] == "behind_camera") {
        nm.reason = fusion::NoMatchReason::behind_camera;
      } else if (cells[6] == "no_detections") {
        nm.reason = fusion::NoMatchReason::no_detections;
      } else if (cells[6] == "anchor_outside_all") {
        nm.reason = fusion::NoMatchReason::anchor_outside_all;
      } else {
        throw DataError(where + ": unknown reason '" + cells[6] + "'");
      }
      r.outcome = nm;
    } else {
      throw DataError(where + ": matched must be 0 or 1");
    }
    if (!cells[5].empty()) {
      r.iou_with_truth = parse_double(cells[5], where);
      if (*r.iou_with_truth < 0.0 || *r.iou_with_truth > 1.0) throw DataError(where + ": iou outside [0, 1]");
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<metrics::EvalRecord> to_eval_records(const std::vector<ResultRow>& rows) {
  std::vector<metrics::EvalRecord> out;
  for (const auto& r : rows) {
    if (!r.iou_with_truth) continue;
    out.push_back({r.frame, r.mode, r.outcome, *r.iou_with_truth});
  }
  return out;
}

// ---- trajectory CSV -----------------------------------------------------------

void write_trajectory_csv(const metrics::TrajectoryLog& log, std::ostream& out) {
  out << kTrajectoryHeader << '\n';
  for (const auto& r : log.rows) {
    out << format_double(r.t) << ',' << format_double(r.ego_speed) << ',' << format_double(r.gap_to_lead) << ','
        << format_double(r.lead_speed) << '\n';
  }
}

metrics::TrajectoryLog read_trajectory_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(name + ": empty trajectory file");
  strip_cr(line);
  if (line != kTrajectoryHeader) throw DataError(name + ": unexpected header '" + line + "'");
  metrics::TrajectoryLog log;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw DataError(where + ": expected 4 columns");
    log.rows.push_back({parse_double(cells[0], where), parse_double(cells[1], where), parse_double(cells[2], where),
                        parse_double(cells[3], where)});
  }
  log.validate();
  return log;
}

}  // namespace dtfusion::run
