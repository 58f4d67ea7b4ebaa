#include "dtfusion/detect_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace dtfusion::detect_io {

using nlohmann::json;

namespace {

std::string describe(const BoundingBox& b) {
  std::ostringstream os;
  os << std::setprecision(17) << "(" << b.x_min << ", " << b.y_min << ", " << b.x_max << ", " << b.y_max << ")";
  return os.str();
}

double number_field(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw ParseError(line, std::string("box field '") + key + "' missing or not a number");
  }
  return it->get<double>();
}

}  // namespace

InvalidBox::InvalidBox(std::int64_t frame, const BoundingBox& box)
    : DataError("frame " + std::to_string(frame) + ": invalid box " + describe(box)), frame_(frame), box_(box) {}

DetectionMap parse_detections(std::istream& in) {
  DetectionMap out;
  std::string text;
  std::size_t line = 0;
  std::optional<std::int64_t> last_frame;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;

    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, e.what());
    }
    if (!rec.is_object()) throw ParseError(line, "expected a JSON object");
    const auto frame_it = rec.find("frame");
    if (frame_it == rec.end() || !frame_it->is_number_integer() || frame_it->get<std::int64_t>() < 0) {
      throw ParseError(line, "'frame' missing or not a non-negative integer");
    }
    const auto frame = frame_it->get<std::int64_t>();
    if (last_frame && frame <= *last_frame) throw ParseError(line, "frame indices must be strictly increasing");
    last_frame = frame;

    const auto boxes_it = rec.find("boxes");
    if (boxes_it == rec.end() || !boxes_it->is_array()) throw ParseError(line, "'boxes' missing or not an array");

    std::vector<BoundingBox> boxes;
    boxes.reserve(boxes_it->size());
    for (const auto& jb : *boxes_it) {
      if (!jb.is_object()) throw ParseError(line, "box is not an object");
      BoundingBox b;
      b.x_min = number_field(jb, "x_min", line);
      b.y_min = number_field(jb, "y_min", line);
      b.x_max = number_field(jb, "x_max", line);
      b.y_max = number_field(jb, "y_max", line);
      const auto cls = jb.find("class_id");
      if (cls == jb.end() || !cls->is_number_integer()) throw ParseError(line, "'class_id' missing or not an integer");
      b.class_id = cls->get<int>();
      if (const auto score = jb.find("score"); score != jb.end() && !score->is_null()) {
        if (!score->is_number()) throw ParseError(line, "'score' is not a number");
        b.score = score->get<double>();
        if (*b.score < 0.0 || *b.score > 1.0) throw ParseError(line, "'score' outside [0, 1]");
      }
      b.source = BoxSource::detector;
      if (!b.is_valid()) throw InvalidBox(frame, b);
      boxes.push_back(b);
    }
    out.emplace(frame, std::move(boxes));
  }
  return out;
}

DetectionMap load_detections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open detection file");
  return parse_detections(in);
}

void write_detections(const DetectionMap& detections, std::ostream& out) {
  for (const auto& [frame, boxes] : detections) {
    json rec;
    rec["frame"] = frame;
    rec["boxes"] = json::array();
    for (const auto& b : boxes) {
      if (!b.is_valid()) throw InvalidBox(frame, b);
      json jb{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}, {"class_id", b.class_id}};
      if (b.score) jb["score"] = *b.score;
      rec["boxes"].push_back(std::move(jb));
    }
    out << rec.dump() << '\n';
  }
}

void save_detections(const DetectionMap& detections, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open detection file for writing");
  write_detections(detections, out);
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

std::vector<BoundingBox> filter_classes(std::span<const BoundingBox> boxes, const std::set<int>& allowed,
                                        std::vector<std::size_t>* kept_indices) {
  std::vector<BoundingBox> out;
  if (kept_indices) kept_indices->clear();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (!allowed.empty() && !allowed.contains(boxes[i].class_id)) continue;
    out.push_back(boxes[i]);
    if (kept_indices) kept_indices->push_back(i);
  }
  return out;
}

}  // namespace dtfusion::detect_io
