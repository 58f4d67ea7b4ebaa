#include "dtfusion/pipeline.hpp"

#include "dtfusion/detect_io.hpp"
#include "dtfusion/metrics.hpp"
#include "dtfusion/seed.hpp"

namespace dtfusion {

run::ResultRow evaluate_frame(const Frame& frame, VehicleId target, fusion::Mode mode,
                              const fusion::DepthParams& params, const std::set<int>& classes) {
  fusion::DepthParams frame_params = params;
  frame_params.seed = derive_seed(params.seed, {static_cast<std::uint64_t>(frame.index)});

  run::ResultRow row;
  row.frame = frame.index;
  row.mode = mode;

  if (classes.empty()) {
    row.outcome = fusion::fuse_frame(frame, target, mode, frame_params);
  } else {
    std::vector<std::size_t> kept;
    Frame filtered = frame;
    filtered.detections = detect_io::filter_classes(frame.detections, classes, &kept);
    row.outcome = fusion::fuse_frame(filtered, target, mode, frame_params);
    if (auto* m = std::get_if<fusion::Matched>(&row.outcome)) m->box_index = kept[m->box_index];
  }

  if (const auto gt = frame.gt_boxes.find(target); gt != frame.gt_boxes.end()) {
    const auto* m = std::get_if<fusion::Matched>(&row.outcome);
    row.iou_with_truth = m ? metrics::iou(frame.detections[m->box_index], gt->second) : 0.0;
  }
  return row;
}

}  // namespace dtfusion
