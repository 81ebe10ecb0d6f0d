#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "velest/scenario_config.hpp"
#include "velest/simulator.hpp"

namespace velest {

inline constexpr double kCrossingVelocity = kph_to_mm_s(72.0);  // 20000 mm/s

enum class Column { Raw, Vn, Vs, Fused, Kalman };

std::optional<double> column_value(const FrameRecord& frame, Column column);
std::string_view column_name(Column column);     // CSV header name
Column column_from_name(std::string_view name);  // header name or saito/kalman/raw_diff

/// First time the series falls from >= threshold to < threshold, linearly
/// interpolated between the two surrounding present samples.
std::optional<double> falling_crossing_time(std::span<const double> times,
                                            std::span<const std::optional<double>> values,
                                            double threshold);
std::size_t count_falling_crossings(std::span<const double> values, double threshold);

/// (estimate crossing - ground-truth crossing) in ms; empty when the
/// estimate never crosses. Throws UsageError unless the ground truth falls
/// through the threshold exactly once.
std::optional<double> measure_delay_series(std::span<const double> times,
                                           std::span<const double> ground_truth,
                                           std::span<const std::optional<double>> estimate,
                                           double threshold);

/// Delay of the estimated target velocity (ego velocity + relative
/// estimate) against the ground-truth target velocity.
std::optional<double> measure_delay(const ScenarioTrace& trace, Column column,
                                    double crossing_velocity = kCrossingVelocity);

/// Sample standard deviation of (estimate - true relative velocity) over
/// frames [begin, end). Throws UsageError for windows under 100 frames;
/// empty ("insufficient data") when more than half the estimates are missing.
std::optional<double> measure_dispersion(const ScenarioTrace& trace, Column column,
                                         std::size_t begin, std::size_t end);

/// 100 * frames without an estimate / frames.
double measure_non_detection_rate(const ScenarioTrace& trace, Column column);
/// Same, from the explicit no-estimate flag.
double measure_non_detection_rate(const ScenarioTrace& trace);

struct EstimatorMetrics {
  std::string estimator;
  std::optional<double> delay_ms;
  std::optional<double> dispersion_mm_s;
  double non_detection_percent = 0.0;
  bool delay_applicable = false;       // ground truth crosses once
  bool dispersion_applicable = false;  // steady window exists
};

struct MetricsReport {
  std::string preset;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string toggles;
  std::size_t dispersion_begin = 0;
  std::size_t dispersion_end = 0;
  std::vector<EstimatorMetrics> estimators;
};

/// Metrics for each estimator column present in the trace. Delay is
/// evaluated only when the ground truth crosses 72 kph once; dispersion
/// only when the ground-truth relative velocity is constant over the window.
MetricsReport compute_report(const ScenarioTrace& trace, std::size_t dispersion_begin,
                             std::optional<std::size_t> dispersion_end);

std::string format_report(const MetricsReport& report);
nlohmann::json to_json(const MetricsReport& report);
/// Inverse of to_json. Throws ValidationError on a malformed document.
MetricsReport metrics_report_from_json(const nlohmann::json& doc);

}  // namespace velest
