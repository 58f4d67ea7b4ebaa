#include "dtfusion/frame.hpp"

#include <cmath>

namespace dtfusion {

bool BoundingBox::is_valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) && std::isfinite(y_max) &&
         x_min < x_max && y_min < y_max;
}

DepthImage::DepthImage(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw DataError("depth image dimensions must be non-negative");
  ranges_.assign(static_cast<std::size_t>(width) * height, fill);
}

DepthImage::DepthImage(int width, int height, std::vector<double> ranges)
    : width_(width), height_(height), ranges_(std::move(ranges)) {
  if (width < 0 || height < 0) throw DataError("depth image dimensions must be non-negative");
  if (ranges_.size() != static_cast<std::size_t>(width) * height) {
    throw DataError("depth raster length does not match width x height");
  }
  for (double r : ranges_) {
    if (!is_no_return(r) && !(std::isfinite(r) && r > 0.0)) {
      throw DataError("depth raster holds a non-positive or non-finite range");
    }
  }
}

std::string_view to_string(DriverType t) {
  switch (t) {
    case DriverType::aggressive:
      return "aggressive";
    case DriverType::normal:
      return "normal";
    case DriverType::conservative:
      return "conservative";
  }
  return "normal";
}

DriverType driver_type_from_string(std::string_view s) {
  if (s == "aggressive") return DriverType::aggressive;
  if (s == "normal") return DriverType::normal;
  if (s == "conservative") return DriverType::conservative;
  throw DataError("unknown driver type '" + std::string(s) + "'");
}

const TwinRecord* Frame::find_twin(VehicleId id) const {
  for (const auto& r : twin) {
    if (r.vehicle_id == id) return &r;
  }
  return nullptr;
}

}  // namespace dtfusion
