#include "velest/pipeline.hpp"

#include <optional>

#include "velest/disparity_fusion.hpp"
#include "velest/errors.hpp"
#include "velest/kalman_baseline.hpp"
#include "velest/velocity_filter.hpp"

namespace velest {

std::vector<StereoEvidence> evaluate_stereo(const ScenarioTrace& trace, const RunConfig& config) {
  const auto& sc = config.scenario;
  const auto& alg = config.algorithms;
  std::vector<StereoEvidence> evidence(trace.frames.size());
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    const FrameRecord& frame = trace.frames[i];
    if (!frame.d_obs_mm) continue;
    const DisparityPair pair = generate_disparity_pair(frame, sc.noise, sc.camera, sc.scene, i);
    const DepthHistogram histogram =
        config.pipeline.enable_disparity_fusion
            ? compute_depth_histogram(fuse_disparity_maps(pair.t1, pair.t2).map, pair.roi,
                                      sc.camera, alg.bin_width_mm)
            : compute_depth_histogram(pair.t1, pair.roi, sc.camera, alg.bin_width_mm);
    auto& e = evidence[i];
    e.count = histogram.total_count;
    e.reliability = classify_stereo_reliability(e.count, *frame.d_obs_mm, alg.reliability);
    e.valid = e.reliability.state != StereoState::None;
  }
  return evidence;
}

void run_kalman_column(ScenarioTrace& trace, const std::vector<StereoEvidence>& evidence,
                       const KalmanParams& params) {
  if (evidence.size() != trace.frames.size()) {
    throw UsageError("pipeline: evidence does not match the trace");
  }
  std::optional<KalmanState> state;
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    FrameRecord& frame = trace.frames[i];
    frame.v_kalman_mm_s.reset();
    if (!evidence[i].valid) continue;
    const double z = *frame.d_obs_mm;
    if (last) {
      const double elapsed = static_cast<double>(i - *last) * trace.dt_s;
      if (state) {
        state = kalman_step(*state, params, z, elapsed);
      } else {
        const double v0 = raw_velocity(z, *trace.frames[*last].d_obs_mm, elapsed);
        state = kalman_initialize(params, z, v0);
      }
      frame.v_kalman_mm_s = state->velocity();
    }
    last = i;
  }
}

ScenarioTrace run_pipeline(const ScenarioTrace& input, const RunConfig& config) {
  input.validate();
  config.pipeline.validate();
  const auto& alg = config.algorithms;
  const auto& pipe = config.pipeline;

  ScenarioTrace trace = input;
  const std::vector<StereoEvidence> evidence = evaluate_stereo(trace, config);

  FilterState filter;
  std::optional<std::size_t> last_valid;
  std::optional<double> last_raw;
  MonoVelocityTracker mono_left(alg.mono_assumed_width_mm, config.scenario.scene.focal_over_pitch_px,
                                alg.mono_smoothing_gain);
  MonoVelocityTracker mono_right(alg.mono_assumed_width_mm,
                                 config.scenario.scene.focal_over_pitch_px,
                                 alg.mono_smoothing_gain);
  FusionState fusion;
  fusion.g_threshold = -alg.decel_threshold_g * alg.gravity;

  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    FrameRecord& frame = trace.frames[i];
    frame.histo_count = evidence[i].count;
    frame.v_raw_mm_s.reset();
    frame.vn_mm_s.reset();
    frame.vs_mm_s.reset();
    frame.v_fused_mm_s.reset();
    frame.no_estimate = false;

    // Stereo velocity.
    std::optional<double> v_s;
    std::optional<double> a_s;
    if (evidence[i].valid) {
      const double d = *frame.d_obs_mm;
      if (last_valid) {
        const double elapsed = static_cast<double>(i - *last_valid) * trace.dt_s;
        const double v_raw = raw_velocity(d, *trace.frames[*last_valid].d_obs_mm, elapsed);
        frame.v_raw_mm_s = v_raw;
        if (pipe.enable_velocity_filter) {
          if (filter.initialized()) {
            const FilterStepResult r = step(filter, alg.saito, d, elapsed);
            filter = r.state;
            frame.vs_mm_s = r.output.vs;
            frame.vn_mm_s = r.output.vn;
          } else {
            filter = initialize(d, v_raw);
            frame.vs_mm_s = v_raw;
            frame.vn_mm_s = v_raw;
          }
          v_s = frame.vs_mm_s;
          a_s = filter.an_prev();
        } else {
          v_s = v_raw;
          a_s = last_raw ? (v_raw - *last_raw) / elapsed : 0.0;
        }
        last_raw = v_raw;
      }
      last_valid = i;
    }

    // Mono: the camera with the higher reliability among those with a
    // velocity this frame; ties go to the right camera.
    std::optional<double> v_l;
    std::optional<double> v_r;
    if (frame.width_l_px) v_l = mono_left.update({frame.t_s, *frame.width_l_px});
    if (frame.width_r_px) v_r = mono_right.update({frame.t_s, *frame.width_r_px});
    std::optional<double> v_m;
    double r_m = 0.0;
    if (v_r && (!v_l || frame.r_m_r >= frame.r_m_l)) {
      v_m = v_r;
      r_m = frame.r_m_r;
    } else if (v_l) {
      v_m = v_l;
      r_m = frame.r_m_l;
    }

    if (pipe.enable_detection_fusion) {
      FusionInputs in;
      in.v_s = v_s;
      in.a_s = a_s;
      in.reliability = v_s ? evidence[i].reliability : ReliabilityState::of(StereoState::None);
      in.v_m = v_m;
      in.r_m = r_m;
      in.dt = trace.dt_s;
      const FusionOutcome outcome = fuse_velocity(in, fusion);
      fusion = outcome.state;
      frame.v_fused_mm_s = outcome.v_f;
    } else {
      frame.v_fused_mm_s = v_s;
    }

    if (!pipe.run_raw_diff) frame.v_raw_mm_s.reset();
    if (!pipe.run_saito) {
      frame.vs_mm_s.reset();
      frame.vn_mm_s.reset();
      frame.v_fused_mm_s.reset();
    }
  }

  if (pipe.run_kalman) {
    run_kalman_column(trace, evidence, config.effective_kalman());
  } else {
    for (auto& frame : trace.frames) frame.v_kalman_mm_s.reset();
  }

  for (auto& frame : trace.frames) {
    if (pipe.run_saito) {
      frame.no_estimate = !frame.v_fused_mm_s;
    } else if (pipe.run_kalman) {
      frame.no_estimate = !frame.v_kalman_mm_s;
    } else {
      frame.no_estimate = !frame.v_raw_mm_s;
    }
  }
  return trace;
}

}  // namespace velest
