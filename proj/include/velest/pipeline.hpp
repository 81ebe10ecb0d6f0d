#pragma once

#include <cstddef>
#include <vector>

#include "velest/detection_fusion.hpp"
#include "velest/scenario_config.hpp"
#include "velest/simulator.hpp"

namespace velest {

/// Per-frame stereo evidence: depth-histogram count of the map in use
/// (fused when disparity fusion is on, T1 otherwise) and the resulting
/// reliability. Stereo is usable when a distance was observed and the
/// reliability is not NONE.
struct StereoEvidence {
  std::size_t count = 0;
  ReliabilityState reliability;
  bool valid = false;
};

std::vector<StereoEvidence> evaluate_stereo(const ScenarioTrace& trace, const RunConfig& config);

/// Fills v_kalman on usable stereo frames. The filter is seeded on the
/// second usable frame with the raw velocity, like the adaptive filter.
void run_kalman_column(ScenarioTrace& trace, const std::vector<StereoEvidence>& evidence,
                       const KalmanParams& params);

/// Runs every enabled stage over the trace and returns it with the estimate
/// columns filled. Disabled stages pass their inputs through: no disparity
/// fusion uses the T1 map, no detection fusion reports V_s (or no estimate),
/// no velocity filter differentiates raw distance.
ScenarioTrace run_pipeline(const ScenarioTrace& trace, const RunConfig& config);

}  // namespace velest
