#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "velest/metrics.hpp"
#include "velest/pipeline.hpp"
#include "velest/scenario_config.hpp"
#include "velest/simulator.hpp"

namespace velest {

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count);

/// Median; +inf entries (missing metrics) sort last.
double median(std::vector<double> values);

/// Generates and runs one trace for `seed`.
ScenarioTrace run_seed(const RunConfig& config, std::uint64_t seed);

/// One trace per seed, in seed order. Seeds run concurrently (OpenMP).
std::vector<ScenarioTrace> run_seeds(const RunConfig& config, std::span<const std::uint64_t> seeds);

/// Same, single-threaded. Kept as the reference for the parallel runner.
std::vector<ScenarioTrace> run_seeds_serial(const RunConfig& config,
                                            std::span<const std::uint64_t> seeds);

/// Copy of `config` with all three estimators selected; stage toggles are
/// left as they are.
RunConfig with_all_estimators(RunConfig config);

/// Traces plus their stereo evidence, so the baseline can be re-run for
/// many process-noise values without regenerating anything.
struct PreparedRuns {
  RunConfig config;
  std::vector<ScenarioTrace> traces;
  std::vector<std::vector<StereoEvidence>> evidence;
};

PreparedRuns prepare_runs(const RunConfig& config, std::span<const std::uint64_t> seeds);

/// Per-seed metric of the Kalman column for process noise q. Missing
/// metrics are +inf.
std::vector<double> kalman_dispersions(const PreparedRuns& runs, double q);
std::vector<double> kalman_delays(const PreparedRuns& runs, double q);

/// Per-seed metric of an already filled column.
std::vector<double> column_dispersions(const PreparedRuns& runs, Column column);
std::vector<double> column_delays(const PreparedRuns& runs, Column column);

struct KalmanTuning {
  std::string matched_on;  // "dispersion" or "delay"
  double process_noise_accel = 0.0;
  double target = 0.0;
  double achieved = 0.0;
  bool matched = false;  // |achieved / target - 1| <= 10 %
};

inline constexpr double kTuningMinQ = 1e-2;
inline constexpr double kTuningMaxQ = 1e4;
inline constexpr double kTuningTolerance = 0.10;

/// Bisection on log(q) so that the median Kalman dispersion equals target.
KalmanTuning tune_kalman_to_dispersion(const PreparedRuns& runs, double target);
/// Bisection on log(q) so that the median Kalman delay equals target.
KalmanTuning tune_kalman_to_delay(const PreparedRuns& runs, double target);

struct FairComparison {
  std::string axis;  // "delay_ms" or "dispersion_mm_s"
  KalmanTuning tuning;
  std::vector<double> saito;
  std::vector<double> kalman;
  std::vector<double> raw;
  double saito_median = 0.0;
  double kalman_median = 0.0;
  double raw_median = 0.0;
};

/// Responsiveness under matched stability: q is tuned so the Kalman
/// dispersion on the steady scenario matches the adaptive filter's, then
/// delays are compared on the braking scenario.
FairComparison compare_delay(const RunConfig& braking, const RunConfig& steady,
                             std::span<const std::uint64_t> seeds);

/// Stability under matched responsiveness: q is tuned so the Kalman delay
/// on the braking scenario matches the adaptive filter's, then dispersions
/// are compared on the steady scenario.
FairComparison compare_dispersion(const RunConfig& braking, const RunConfig& steady,
                                  std::span<const std::uint64_t> seeds);

struct AblationRow {
  PipelineConfig pipeline;
  std::vector<double> rates;  // per seed, percent
  double median = 0.0;
};

/// Non-detection rate for toggles {3}, {1,3}, {1,2,3}.
std::vector<AblationRow> ablate(const RunConfig& base, std::span<const std::uint64_t> seeds);

struct DropoutCalibration {
  double dropout_prob = 0.0;
  double median_rate = 0.0;
};

/// Sweeps dropout_prob_stereo (bisection) until the median stereo-only
/// non-detection rate reaches target_percent.
DropoutCalibration calibrate_stereo_dropout(const RunConfig& base,
                                            std::span<const std::uint64_t> seeds,
                                            double target_percent);

}  // namespace velest
