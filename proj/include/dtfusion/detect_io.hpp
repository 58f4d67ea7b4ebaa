#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "dtfusion/frame.hpp"

namespace dtfusion::detect_io {

using DetectionMap = std::map<std::int64_t, std::vector<BoundingBox>>;

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InvalidBox : public DataError {
 public:
  InvalidBox(std::int64_t frame, const BoundingBox& box);

  std::int64_t frame() const noexcept { return frame_; }
  const BoundingBox& box() const noexcept { return box_; }

 private:
  std::int64_t frame_;
  BoundingBox box_;
};

/// Reads JSON Lines: one {"frame": int, "boxes": [...]} object per line.
/// Unknown keys are ignored; blank lines are skipped.
DetectionMap load_detections(const std::filesystem::path& path);
DetectionMap parse_detections(std::istream& in);

void save_detections(const DetectionMap& detections, const std::filesystem::path& path);
void write_detections(const DetectionMap& detections, std::ostream& out);

/// Keeps boxes whose class is in `allowed`; an empty set keeps everything.
/// `kept_indices` receives the original index of each surviving box.
std::vector<BoundingBox> filter_classes(std::span<const BoundingBox> boxes, const std::set<int>& allowed,
                                        std::vector<std::size_t>* kept_indices = nullptr);

}  // namespace dtfusion::detect_io
