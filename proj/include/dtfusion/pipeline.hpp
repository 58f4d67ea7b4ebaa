#pragma once

#include <set>

#include "dtfusion/fusion.hpp"
#include "dtfusion/run_format.hpp"

namespace dtfusion {

/// Matches `target` in one frame and scores the pick against the target's
/// ground-truth box. Detections whose class is not in `classes` (when
/// non-empty) are hidden from the matcher; the reported box index still
/// refers to frame.detections. Depth sampling uses a per-frame seed derived
/// from params.seed.
run::ResultRow evaluate_frame(const Frame& frame, VehicleId target, fusion::Mode mode,
                              const fusion::DepthParams& params, const std::set<int>& classes = {});

}  // namespace dtfusion
