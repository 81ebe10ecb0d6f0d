#include "velest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "velest/errors.hpp"

namespace velest {

namespace {

constexpr std::size_t kMinDispersionFrames = 100;

std::string fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

}  // namespace

std::optional<double> column_value(const FrameRecord& frame, Column column) {
  switch (column) {
    case Column::Raw:
      return frame.v_raw_mm_s;
    case Column::Vn:
      return frame.vn_mm_s;
    case Column::Vs:
      return frame.vs_mm_s;
    case Column::Fused:
      return frame.v_fused_mm_s;
    case Column::Kalman:
      return frame.v_kalman_mm_s;
  }
  return std::nullopt;
}

std::string_view column_name(Column column) {
  switch (column) {
    case Column::Raw:
      return "v_raw_mms";
    case Column::Vn:
      return "vn_mms";
    case Column::Vs:
      return "vs_mms";
    case Column::Fused:
      return "v_fused_mms";
    case Column::Kalman:
      return "v_kalman_mms";
  }
  return "?";
}

Column column_from_name(std::string_view name) {
  if (name == "v_raw_mms" || name == "raw_diff" || name == "raw") return Column::Raw;
  if (name == "vn_mms") return Column::Vn;
  if (name == "vs_mms") return Column::Vs;
  if (name == "v_fused_mms" || name == "saito" || name == "saito_pipeline") return Column::Fused;
  if (name == "v_kalman_mms" || name == "kalman") return Column::Kalman;
  throw UsageError("unknown estimator column '" + std::string(name) + "'");
}

std::optional<double> falling_crossing_time(std::span<const double> times,
                                            std::span<const std::optional<double>> values,
                                            double threshold) {
  if (times.size() != values.size()) throw UsageError("crossing: size mismatch");
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) continue;
    if (prev) {
      const double a = *values[*prev];
      const double b = *values[i];
      if (a >= threshold && b < threshold) {
        const double w = (a - threshold) / (a - b);
        return times[*prev] + w * (times[i] - times[*prev]);
      }
    }
    prev = i;
  }
  return std::nullopt;
}

std::size_t count_falling_crossings(std::span<const double> values, double threshold) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i - 1] >= threshold && values[i] < threshold) ++n;
  }
  return n;
}

std::optional<double> measure_delay_series(std::span<const double> times,
                                           std::span<const double> ground_truth,
                                           std::span<const std::optional<double>> estimate,
                                           double threshold) {
  if (times.size() != ground_truth.size() || times.size() != estimate.size()) {
    throw UsageError("delay: series lengths differ");
  }
  if (count_falling_crossings(ground_truth, threshold) != 1) {
    throw UsageError("delay: ground truth must cross the threshold exactly once");
  }
  std::vector<std::optional<double>> gt(ground_truth.begin(), ground_truth.end());
  const double t_gt = *falling_crossing_time(times, gt, threshold);
  const auto t_est = falling_crossing_time(times, estimate, threshold);
  if (!t_est) return std::nullopt;
  return (*t_est - t_gt) * 1000.0;
}

std::optional<double> measure_delay(const ScenarioTrace& trace, Column column,
                                    double crossing_velocity) {
  std::vector<double> times, gt;
  std::vector<std::optional<double>> est;
  for (const auto& f : trace.frames) {
    times.push_back(f.t_s);
    gt.push_back(f.v_target_true_mm_s);
    const auto v = column_value(f, column);
    est.push_back(v ? std::optional<double>(f.ego_velocity_mm_s() + *v) : std::nullopt);
  }
  return measure_delay_series(times, gt, est, crossing_velocity);
}

std::optional<double> measure_dispersion(const ScenarioTrace& trace, Column column,
                                         std::size_t begin, std::size_t end) {
  if (end > trace.frames.size() || begin >= end) {
    throw UsageError("dispersion: window outside the trace");
  }
  if (end - begin < kMinDispersionFrames) {
    throw UsageError("dispersion: window needs at least 100 frames");
  }
  std::vector<double> errors;
  for (std::size_t i = begin; i < end; ++i) {
    const auto v = column_value(trace.frames[i], column);
    if (v) errors.push_back(*v - trace.frames[i].v_rel_true_mm_s);
  }
  const std::size_t window = end - begin;
  if (2 * errors.size() < window || errors.size() < 2) return std::nullopt;
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= static_cast<double>(errors.size());
  double ss = 0.0;
  for (double e : errors) ss += (e - mean) * (e - mean);
  return std::sqrt(ss / static_cast<double>(errors.size() - 1));
}

double measure_non_detection_rate(const ScenarioTrace& trace, Column column) {
  if (trace.frames.empty()) throw UsageError("non-detection: empty trace");
  std::size_t missing = 0;
  for (const auto& f : trace.frames) missing += column_value(f, column) ? 0 : 1;
  return 100.0 * static_cast<double>(missing) / static_cast<double>(trace.frames.size());
}

double measure_non_detection_rate(const ScenarioTrace& trace) {
  if (trace.frames.empty()) throw UsageError("non-detection: empty trace");
  std::size_t missing = 0;
  for (const auto& f : trace.frames) missing += f.no_estimate ? 1 : 0;
  return 100.0 * static_cast<double>(missing) / static_cast<double>(trace.frames.size());
}

MetricsReport compute_report(const ScenarioTrace& trace, std::size_t dispersion_begin,
                             std::optional<std::size_t> dispersion_end) {
  MetricsReport report;
  report.preset = trace.preset;
  report.seed = trace.seed;
  report.dispersion_begin = dispersion_begin;
  report.dispersion_end = dispersion_end.value_or(trace.frames.size());

  std::vector<double> gt;
  for (const auto& f : trace.frames) gt.push_back(f.v_target_true_mm_s);
  const bool delay_ok = count_falling_crossings(gt, kCrossingVelocity) == 1;

  bool steady = report.dispersion_end <= trace.frames.size() &&
                report.dispersion_end > report.dispersion_begin &&
                report.dispersion_end - report.dispersion_begin >= kMinDispersionFrames;
  if (steady) {
    double lo = trace.frames[report.dispersion_begin].v_rel_true_mm_s;
    double hi = lo;
    for (std::size_t i = report.dispersion_begin; i < report.dispersion_end; ++i) {
      lo = std::min(lo, trace.frames[i].v_rel_true_mm_s);
      hi = std::max(hi, trace.frames[i].v_rel_true_mm_s);
    }
    steady = hi - lo <= 1.0;
  }

  const std::pair<const char*, Column> estimators[] = {
      {"saito", Column::Fused}, {"kalman", Column::Kalman}, {"raw_diff", Column::Raw}};
  for (const auto& [name, column] : estimators) {
    const bool present = std::any_of(trace.frames.begin(), trace.frames.end(),
                                     [&](const FrameRecord& f) { return column_value(f, column); });
    if (!present) continue;
    EstimatorMetrics m;
    m.estimator = name;
    m.non_detection_percent = measure_non_detection_rate(trace, column);
    m.delay_applicable = delay_ok;
    if (delay_ok) m.delay_ms = measure_delay(trace, column);
    m.dispersion_applicable = steady;
    if (steady) {
      m.dispersion_mm_s =
          measure_dispersion(trace, column, report.dispersion_begin, report.dispersion_end);
    }
    report.estimators.push_back(m);
  }
  return report;
}

std::string format_report(const MetricsReport& report) {
  std::ostringstream out;
  out << "preset " << report.preset << "  seed " << report.seed;
  if (!report.toggles.empty()) out << "  toggles " << report.toggles;
  if (!report.config_hash.empty()) out << "  config " << report.config_hash;
  out << '\n';
  out << "estimator   delay@72kph(ms)   dispersion(mm/s,1sigma)   non-detection(%)\n";
  for (const auto& m : report.estimators) {
    char line[160];
    const std::string delay = !m.delay_applicable ? "n/a"
                              : m.delay_ms        ? fixed(*m.delay_ms, 1)
                                                  : "no crossing";
    const std::string disp = !m.dispersion_applicable ? "n/a"
                             : m.dispersion_mm_s      ? fixed(*m.dispersion_mm_s, 1)
                                                      : "insufficient data";
    std::snprintf(line, sizeof(line), "%-10s  %16s  %24s  %17s\n", m.estimator.c_str(),
                  delay.c_str(), disp.c_str(), fixed(m.non_detection_percent, 2).c_str());
    out << line;
  }
  return out.str();
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["preset"] = report.preset;
  j["seed"] = report.seed;
  j["config_hash"] = report.config_hash;
  j["toggles"] = report.toggles;
  j["dispersion_window"] = {report.dispersion_begin, report.dispersion_end};
  j["estimators"] = nlohmann::json::array();
  for (const auto& m : report.estimators) {
    nlohmann::json e;
    e["estimator"] = m.estimator;
    e["delay_ms"] = m.delay_ms ? nlohmann::json(*m.delay_ms) : nlohmann::json(nullptr);
    e["dispersion_mm_s"] =
        m.dispersion_mm_s ? nlohmann::json(*m.dispersion_mm_s) : nlohmann::json(nullptr);
    e["non_detection_percent"] = m.non_detection_percent;
    e["delay_applicable"] = m.delay_applicable;
    e["dispersion_applicable"] = m.dispersion_applicable;
    j["estimators"].push_back(e);
  }
  return j;
}

MetricsReport metrics_report_from_json(const nlohmann::json& doc) {
  const auto optional_number = [](const nlohmann::json& v) -> std::optional<double> {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
  };
  try {
    MetricsReport report;
    report.preset = doc.at("preset").get<std::string>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.config_hash = doc.value("config_hash", "");
    report.toggles = doc.value("toggles", "");
    const auto& window = doc.at("dispersion_window");
    report.dispersion_begin = window.at(0).get<std::size_t>();
    report.dispersion_end = window.at(1).get<std::size_t>();
    for (const auto& e : doc.at("estimators")) {
      EstimatorMetrics m;
      m.estimator = e.at("estimator").get<std::string>();
      m.delay_ms = optional_number(e.at("delay_ms"));
      m.dispersion_mm_s = optional_number(e.at("dispersion_mm_s"));
      m.non_detection_percent = e.at("non_detection_percent").get<double>();
      m.delay_applicable = e.at("delay_applicable").get<bool>();
      m.dispersion_applicable = e.at("dispersion_applicable").get<bool>();
      report.estimators.push_back(m);
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed metrics document: ") + e.what());
  }
}

}  // namespace velest
