#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dtfusion/detect_io.hpp"
#include "dtfusion/fusion.hpp"
#include "dtfusion/geometry.hpp"
#include "dtfusion/metrics.hpp"
#include "dtfusion/pipeline.hpp"
#include "dtfusion/run_format.hpp"
#include "dtfusion/safety.hpp"
#include "dtfusion/scene.hpp"

namespace py = pybind11;
using namespace dtfusion;

namespace {

DepthImage depth_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 2) throw py::value_error("depth raster must be a 2-D array (height, width)");
  const auto h = static_cast<int>(arr.shape(0));
  const auto w = static_cast<int>(arr.shape(1));
  std::vector<double> values(arr.data(), arr.data() + arr.size());
  return DepthImage(w, h, std::move(values));
}

py::array_t<double> depth_to_array(const DepthImage& img) {
  py::array_t<double> out({img.height(), img.width()});
  std::copy(img.ranges().begin(), img.ranges().end(), out.mutable_data());
  return out;
}

std::vector<metrics::EvalRecord> records_from_ious(const std::vector<std::optional<double>>& ious) {
  std::vector<metrics::EvalRecord> out;
  out.reserve(ious.size());
  for (std::size_t i = 0; i < ious.size(); ++i) {
    metrics::EvalRecord r;
    r.frame = static_cast<std::int64_t>(i);
    if (ious[i]) {
      r.outcome = fusion::Matched{0, 0.0};
      r.iou_with_truth = *ious[i];
    } else {
      r.outcome = fusion::NoMatch{};
    }
    out.push_back(r);
  }
  return out;
}

metrics::TrajectoryLog log_from_rows(const std::vector<std::array<double, 4>>& rows) {
  metrics::TrajectoryLog log;
  for (const auto& r : rows) log.rows.push_back({r[0], r[1], r[2], r[3]});
  log.validate();
  return log;
}

std::vector<std::array<double, 4>> rows_from_log(const metrics::TrajectoryLog& log) {
  std::vector<std::array<double, 4>> out;
  for (const auto& r : log.rows) out.push_back({r.t, r.ego_speed, r.gap_to_lead, r.lead_speed});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Camera / cloud digital-twin target fusion: geometry, matching, simulation and metrics.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<geometry::BehindCamera>(m, "BehindCamera", base.ptr());
  py::register_exception<geometry::NonPositiveRange>(m, "NonPositiveRange", base.ptr());
  py::register_exception<fusion::DegenerateRegion>(m, "DegenerateRegion", base.ptr());
  py::register_exception<fusion::AllSamplesInvalid>(m, "AllSamplesInvalid", base.ptr());
  py::register_exception<fusion::LengthMismatch>(m, "LengthMismatch", base.ptr());
  py::register_exception<fusion::UnknownTarget>(m, "UnknownTarget", base.ptr());
  py::register_exception<metrics::EmptyInput>(m, "EmptyInput", base.ptr());
  py::register_exception<metrics::NoEvent>(m, "NoEvent", base.ptr());

  // ---- geometry
  py::class_<geometry::WorldPoint>(m, "WorldPoint")
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("z"))
      .def_readwrite("x", &geometry::WorldPoint::x)
      .def_readwrite("y", &geometry::WorldPoint::y)
      .def_readwrite("z", &geometry::WorldPoint::z)
      .def("__repr__", [](const geometry::WorldPoint& p) {
        return "WorldPoint(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " + std::to_string(p.z) + ")";
      });
  py::class_<geometry::CameraPoint>(m, "CameraPoint")
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("z"))
      .def_readwrite("x", &geometry::CameraPoint::x)
      .def_readwrite("y", &geometry::CameraPoint::y)
      .def_readwrite("z", &geometry::CameraPoint::z);
  py::class_<geometry::PixelPoint>(m, "PixelPoint")
      .def(py::init<double, double>(), py::arg("u"), py::arg("v"))
      .def_readwrite("u", &geometry::PixelPoint::u)
      .def_readwrite("v", &geometry::PixelPoint::v);
  py::class_<geometry::CameraPose>(m, "CameraPose")
      .def(py::init([](const Eigen::Matrix3d& r, const Eigen::Vector3d& t) { return geometry::CameraPose::make(r, t); }),
           py::arg("rotation") = Eigen::Matrix3d::Identity(), py::arg("translation") = Eigen::Vector3d::Zero())
      .def_readonly("rotation", &geometry::CameraPose::rotation)
      .def_readonly("translation", &geometry::CameraPose::translation);
  py::class_<geometry::CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double f, double dx, double dy, double u0, double v0, int w, int h) {
             geometry::CameraIntrinsics in{f, dx, dy, u0, v0, w, h};
             in.validate();
             return in;
           }),
           py::arg("focal"), py::arg("dx"), py::arg("dy"), py::arg("u0"), py::arg("v0"), py::arg("width"),
           py::arg("height"))
      .def_readonly("focal", &geometry::CameraIntrinsics::focal)
      .def_readonly("u0", &geometry::CameraIntrinsics::u0)
      .def_readonly("v0", &geometry::CameraIntrinsics::v0)
      .def_readonly("width", &geometry::CameraIntrinsics::width)
      .def_readonly("height", &geometry::CameraIntrinsics::height);

  m.def("world_to_camera", &geometry::world_to_camera, py::arg("p"), py::arg("pose"));
  m.def("camera_to_world", &geometry::camera_to_world, py::arg("p"), py::arg("pose"));
  m.def("camera_to_pixel", &geometry::camera_to_pixel, py::arg("p"), py::arg("intrinsics"));
  m.def("project_anchor", &geometry::project_anchor, py::arg("p"), py::arg("pose"), py::arg("intrinsics"));
  m.def("back_project", &geometry::back_project, py::arg("px"), py::arg("range_m"), py::arg("intrinsics"),
        py::arg("pose"));
  m.def("gnss_range", &geometry::gnss_range);

  // ---- fusion
  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init([](double x0, double y0, double x1, double y1, int cls) {
             BoundingBox b{x0, y0, x1, y1, cls, BoxSource::detector, std::nullopt};
             if (!b.is_valid()) throw py::value_error("box needs finite coordinates with min < max");
             return b;
           }),
           py::arg("x_min"), py::arg("y_min"), py::arg("x_max"), py::arg("y_max"), py::arg("class_id") = 2)
      .def_readwrite("x_min", &BoundingBox::x_min)
      .def_readwrite("y_min", &BoundingBox::y_min)
      .def_readwrite("x_max", &BoundingBox::x_max)
      .def_readwrite("y_max", &BoundingBox::y_max)
      .def_readwrite("class_id", &BoundingBox::class_id)
      .def_readwrite("score", &BoundingBox::score)
      .def(py::self == py::self)
      .def("__repr__", [](const BoundingBox& b) {
        return "BoundingBox(" + std::to_string(b.x_min) + ", " + std::to_string(b.y_min) + ", " +
               std::to_string(b.x_max) + ", " + std::to_string(b.y_max) + ")";
      });

  py::class_<DepthImage>(m, "DepthImage")
      .def(py::init(&depth_from_array), py::arg("ranges"))
      .def_property_readonly("width", &DepthImage::width)
      .def_property_readonly("height", &DepthImage::height)
      .def("to_array", &depth_to_array);

  py::class_<fusion::DepthParams>(m, "DepthParams")
      .def(py::init([](double th, int n, std::uint64_t seed) {
             fusion::DepthParams p{th, n, seed};
             p.validate();
             return p;
           }),
           py::arg("th") = 0.1, py::arg("n") = 25, py::arg("seed") = 0)
      .def_readonly("th", &fusion::DepthParams::th)
      .def_readonly("n", &fusion::DepthParams::n)
      .def_readonly("seed", &fusion::DepthParams::seed);

  py::class_<fusion::SampleRegion>(m, "SampleRegion")
      .def_readonly("x_min", &fusion::SampleRegion::x_min)
      .def_readonly("y_min", &fusion::SampleRegion::y_min)
      .def_readonly("x_max", &fusion::SampleRegion::x_max)
      .def_readonly("y_max", &fusion::SampleRegion::y_max);

  py::enum_<fusion::NoMatchReason>(m, "NoMatchReason")
      .value("anchor_outside_all", fusion::NoMatchReason::anchor_outside_all)
      .value("behind_camera", fusion::NoMatchReason::behind_camera)
      .value("no_detections", fusion::NoMatchReason::no_detections);
  py::class_<fusion::Matched>(m, "Matched")
      .def_readonly("box_index", &fusion::Matched::box_index)
      .def_readonly("delta_d", &fusion::Matched::delta_d)
      .def("__repr__", [](const fusion::Matched& x) {
        return "Matched(box_index=" + std::to_string(x.box_index) + ", delta_d=" + std::to_string(x.delta_d) + ")";
      });
  py::class_<fusion::NoMatch>(m, "NoMatch")
      .def_readonly("reason", &fusion::NoMatch::reason)
      .def("__repr__", [](const fusion::NoMatch& x) { return "NoMatch(" + std::string(fusion::to_string(x.reason)) + ")"; });

  m.def("sample_region", &fusion::sample_region, py::arg("box"), py::arg("th"), py::arg("image_w"), py::arg("image_h"));
  m.def(
      "depth_evaluate",
      [](const DepthImage& img, const std::vector<BoundingBox>& boxes, const fusion::DepthParams& p) {
        return fusion::depth_evaluate(img, boxes, p);
      },
      py::arg("image"), py::arg("boxes"), py::arg("params") = fusion::DepthParams{});
  m.def(
      "anchor_containment",
      [](const geometry::PixelPoint& a, const std::vector<BoundingBox>& boxes) {
        return fusion::anchor_containment(a, boxes);
      },
      py::arg("anchor"), py::arg("boxes"));
  m.def(
      "match_target",
      [](const geometry::PixelPoint& a, const std::vector<BoundingBox>& boxes, const std::vector<double>& d,
         double d_gnss) { return fusion::match_target(a, boxes, d, d_gnss); },
      py::arg("anchor"), py::arg("boxes"), py::arg("distances"), py::arg("d_gnss"));
  m.def(
      "baseline_match",
      [](const geometry::PixelPoint& a, const std::vector<BoundingBox>& boxes) { return fusion::baseline_match(a, boxes); },
      py::arg("anchor"), py::arg("boxes"));

  // ---- simulation
  py::class_<Frame>(m, "Frame")
      .def_readonly("index", &Frame::index)
      .def_readonly("timestamp", &Frame::timestamp)
      .def_readonly("ego_pose", &Frame::ego_pose)
      .def_readonly("intrinsics", &Frame::intrinsics)
      .def_readonly("detections", &Frame::detections)
      .def_readonly("gt_boxes", &Frame::gt_boxes)
      .def_property_readonly("depth", [](const Frame& f) -> std::optional<DepthImage> { return f.depth; })
      .def_property_readonly("twin_ids", [](const Frame& f) {
        std::vector<VehicleId> ids;
        for (const auto& t : f.twin) ids.push_back(t.vehicle_id);
        return ids;
      });

  py::class_<sim::Scenario>(m, "Scenario")
      .def(py::init([](const std::string& config_json) {
             return sim::generate_scenario(run::scenario_config_from_json(config_json));
           }),
           py::arg("config_json"))
      .def_property_readonly("num_frames", [](const sim::Scenario& s) { return s.steps.size(); })
      .def_property_readonly("overlap_pairs",
                             [](const sim::Scenario& s) {
                               std::vector<std::pair<VehicleId, VehicleId>> out;
                               for (const auto& p : s.overlap_pairs) out.emplace_back(p.far, p.near);
                               return out;
                             })
      .def("frame", &sim::build_frame, py::arg("index"));

  py::enum_<fusion::Mode>(m, "Mode").value("baseline", fusion::Mode::baseline).value("fused", fusion::Mode::fused);
  m.def("fuse_frame", &fusion::fuse_frame, py::arg("frame"), py::arg("target_id"), py::arg("mode"),
        py::arg("params") = fusion::DepthParams{});
  m.def(
      "evaluate_frame",
      [](const Frame& f, VehicleId target, fusion::Mode mode, const fusion::DepthParams& p) {
        const auto row = evaluate_frame(f, target, mode, p);
        return py::make_tuple(row.outcome, row.iou_with_truth);
      },
      py::arg("frame"), py::arg("target_id"), py::arg("mode"), py::arg("params") = fusion::DepthParams{},
      "Returns (outcome, iou_with_truth); iou is None when the target has no ground-truth box.");

  // ---- detection files
  m.def("load_detections", &detect_io::load_detections, py::arg("path"));
  m.def("save_detections", &detect_io::save_detections, py::arg("detections"), py::arg("path"));

  // ---- metrics
  m.def("iou", &metrics::iou, py::arg("a"), py::arg("b"));
  m.def(
      "accuracy_at",
      [](const std::vector<std::optional<double>>& ious, double tau) {
        const auto recs = records_from_ious(ious);
        return metrics::accuracy_at(recs, tau);
      },
      py::arg("ious"), py::arg("tau"), "IoU per record; None marks an unmatched record.");
  m.def(
      "accuracy_curve",
      [](const std::vector<std::optional<double>>& ious, const std::vector<double>& taus) {
        const auto recs = records_from_ious(ious);
        std::vector<std::pair<double, double>> out;
        for (const auto& p : metrics::accuracy_curve(recs, taus)) out.emplace_back(p.tau, p.accuracy);
        return out;
      },
      py::arg("ious"), py::arg("taus"));
  m.def(
      "speed_variance", [](const std::vector<std::array<double, 4>>& rows) { return metrics::speed_variance(log_from_rows(rows)); },
      py::arg("rows"), "rows of (t, ego_speed, gap_to_lead, lead_speed)");
  m.def(
      "ttc_series",
      [](const std::vector<std::array<double, 4>>& rows) {
        std::vector<std::pair<double, std::optional<double>>> out;
        for (const auto& s : metrics::ttc_series(log_from_rows(rows))) out.emplace_back(s.t, s.ttc);
        return out;
      },
      py::arg("rows"));
  m.def(
      "scripted_reaction_experiment",
      [](const std::string& config_json, double lead_time) {
        const auto run = metrics::scripted_reaction_experiment(run::scenario_config_from_json(config_json), lead_time);
        return py::make_tuple(rows_from_log(run.no_advisory), rows_from_log(run.advisory));
      },
      py::arg("config_json"), py::arg("advisory_lead_time"),
      "Returns (no_advisory_rows, advisory_rows), each a list of (t, ego_speed, gap_to_lead, lead_speed).");
}
