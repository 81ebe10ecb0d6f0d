#include "velest/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>

#include "velest/errors.hpp"
#include "velest/metrics.hpp"

namespace velest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs body(i) for i in [0, n) across threads; the first exception is
// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(velest_parallel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::size_t dispersion_end(const RunConfig& config) {
  return config.scenario.dispersion_end.value_or(config.scenario.frames);
}

double dispersion_or_inf(const ScenarioTrace& trace, Column column, const RunConfig& config) {
  return measure_dispersion(trace, column, config.scenario.dispersion_begin,
                            dispersion_end(config))
      .value_or(kInf);
}

double delay_or_inf(const ScenarioTrace& trace, Column column) {
  return measure_delay(trace, column).value_or(kInf);
}

template <typename Metric>
KalmanTuning bisect(const PreparedRuns& runs, double target, bool increasing_in_q,
                    const char* axis, Metric metric) {
  KalmanTuning tuning;
  tuning.matched_on = axis;
  tuning.target = target;
  const auto eval = [&](double log_q) { return median(metric(runs, std::pow(10.0, log_q))); };

  double lo = std::log10(kTuningMinQ);
  double hi = std::log10(kTuningMaxQ);
  const double at_lo = eval(lo);
  const double at_hi = eval(hi);
  const auto below_target = [&](double value) {
    return increasing_in_q ? value < target : value > target;
  };

  double best_q = lo;
  double best_value = at_lo;
  if (!below_target(at_lo)) {
    best_q = lo;
    best_value = at_lo;
  } else if (below_target(at_hi)) {
    best_q = hi;
    best_value = at_hi;
  } else {
    for (int iter = 0; iter < 40; ++iter) {
      const double mid = 0.5 * (lo + hi);
      const double value = eval(mid);
      if (std::abs(value - target) < std::abs(best_value - target)) {
        best_q = mid;
        best_value = value;
      }
      if (std::abs(value / target - 1.0) < 1e-3) break;
      (below_target(value) ? lo : hi) = mid;
    }
  }
  tuning.process_noise_accel = std::pow(10.0, best_q);
  tuning.achieved = best_value;
  tuning.matched = std::isfinite(best_value) &&
                   std::abs(best_value / target - 1.0) <= kTuningTolerance;
  return tuning;
}

}  // namespace

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = first + i;
  return seeds;
}

double median(std::vector<double> values) {
  if (values.empty()) throw UsageError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  const double a = values[n / 2 - 1];
  const double b = values[n / 2];
  return std::isinf(b) ? b : 0.5 * (a + b);
}

ScenarioTrace run_seed(const RunConfig& config, std::uint64_t seed) {
  NoiseModel noise = config.scenario.noise;
  noise.rng_seed = seed;
  RunConfig seeded = config;
  seeded.scenario.noise = noise;
  ScenarioTrace trace = generate_trace(config.scenario.profile, noise, config.scenario.camera,
                                       config.scenario.frames, config.scenario.scene);
  trace.preset = config.scenario.name;
  return run_pipeline(trace, seeded);
}

std::vector<ScenarioTrace> run_seeds(const RunConfig& config,
                                     std::span<const std::uint64_t> seeds) {
  std::vector<ScenarioTrace> traces(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { traces[i] = run_seed(config, seeds[i]); });
  return traces;
}

std::vector<ScenarioTrace> run_seeds_serial(const RunConfig& config,
                                            std::span<const std::uint64_t> seeds) {
  std::vector<ScenarioTrace> traces;
  traces.reserve(seeds.size());
  for (auto seed : seeds) traces.push_back(run_seed(config, seed));
  return traces;
}

RunConfig with_all_estimators(RunConfig config) {
  config.pipeline.run_saito = true;
  config.pipeline.run_kalman = true;
  config.pipeline.run_raw_diff = true;
  return config;
}

PreparedRuns prepare_runs(const RunConfig& config, std::span<const std::uint64_t> seeds) {
  PreparedRuns runs;
  runs.config = config;
  runs.traces.resize(seeds.size());
  runs.evidence.resize(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    runs.traces[i] = run_seed(config, seeds[i]);
    RunConfig seeded = config;
    seeded.scenario.noise.rng_seed = seeds[i];
    runs.evidence[i] = evaluate_stereo(runs.traces[i], seeded);
  });
  return runs;
}

std::vector<double> kalman_dispersions(const PreparedRuns& runs, double q) {
  KalmanParams params = runs.config.effective_kalman();
  params.process_noise_accel = q;
  std::vector<double> out(runs.traces.size());
  parallel_for(runs.traces.size(), [&](std::size_t i) {
    ScenarioTrace trace = runs.traces[i];
    run_kalman_column(trace, runs.evidence[i], params);
    out[i] = dispersion_or_inf(trace, Column::Kalman, runs.config);
  });
  return out;
}

std::vector<double> kalman_delays(const PreparedRuns& runs, double q) {
  KalmanParams params = runs.config.effective_kalman();
  params.process_noise_accel = q;
  std::vector<double> out(runs.traces.size());
  parallel_for(runs.traces.size(), [&](std::size_t i) {
    ScenarioTrace trace = runs.traces[i];
    run_kalman_column(trace, runs.evidence[i], params);
    out[i] = delay_or_inf(trace, Column::Kalman);
  });
  return out;
}

std::vector<double> column_dispersions(const PreparedRuns& runs, Column column) {
  std::vector<double> out;
  for (const auto& trace : runs.traces) out.push_back(dispersion_or_inf(trace, column, runs.config));
  return out;
}

std::vector<double> column_delays(const PreparedRuns& runs, Column column) {
  std::vector<double> out;
  for (const auto& trace : runs.traces) out.push_back(delay_or_inf(trace, column));
  return out;
}

KalmanTuning tune_kalman_to_dispersion(const PreparedRuns& runs, double target) {
  return bisect(runs, target, true, "dispersion", kalman_dispersions);
}

KalmanTuning tune_kalman_to_delay(const PreparedRuns& runs, double target) {
  return bisect(runs, target, false, "delay", kalman_delays);
}

FairComparison compare_delay(const RunConfig& braking, const RunConfig& steady,
                             std::span<const std::uint64_t> seeds) {
  const PreparedRuns steady_runs = prepare_runs(with_all_estimators(steady), seeds);
  const PreparedRuns braking_runs = prepare_runs(with_all_estimators(braking), seeds);

  FairComparison cmp;
  cmp.axis = "delay_ms";
  const double saito_dispersion = median(column_dispersions(steady_runs, Column::Fused));
  cmp.tuning = tune_kalman_to_dispersion(steady_runs, saito_dispersion);
  cmp.saito = column_delays(braking_runs, Column::Fused);
  cmp.kalman = kalman_delays(braking_runs, cmp.tuning.process_noise_accel);
  cmp.raw = column_delays(braking_runs, Column::Raw);
  cmp.saito_median = median(cmp.saito);
  cmp.kalman_median = median(cmp.kalman);
  cmp.raw_median = median(cmp.raw);
  return cmp;
}

FairComparison compare_dispersion(const RunConfig& braking, const RunConfig& steady,
                                  std::span<const std::uint64_t> seeds) {
  const PreparedRuns steady_runs = prepare_runs(with_all_estimators(steady), seeds);
  const PreparedRuns braking_runs = prepare_runs(with_all_estimators(braking), seeds);

  FairComparison cmp;
  cmp.axis = "dispersion_mm_s";
  const double saito_delay = median(column_delays(braking_runs, Column::Fused));
  cmp.tuning = tune_kalman_to_delay(braking_runs, saito_delay);
  cmp.saito = column_dispersions(steady_runs, Column::Fused);
  cmp.kalman = kalman_dispersions(steady_runs, cmp.tuning.process_noise_accel);
  cmp.raw = column_dispersions(steady_runs, Column::Raw);
  cmp.saito_median = median(cmp.saito);
  cmp.kalman_median = median(cmp.kalman);
  cmp.raw_median = median(cmp.raw);
  return cmp;
}

std::vector<AblationRow> ablate(const RunConfig& base, std::span<const std::uint64_t> seeds) {
  std::vector<AblationRow> rows;
  for (int level = 0; level < 3; ++level) {
    RunConfig config = base;
    config.pipeline.enable_velocity_filter = true;
    config.pipeline.enable_disparity_fusion = level >= 1;
    config.pipeline.enable_detection_fusion = level >= 2;
    config.pipeline.run_saito = true;
    config.pipeline.run_kalman = false;
    config.pipeline.run_raw_diff = false;
    AblationRow row;
    row.pipeline = config.pipeline;
    for (const auto& trace : run_seeds(config, seeds)) {
      row.rates.push_back(measure_non_detection_rate(trace));
    }
    row.median = median(row.rates);
    rows.push_back(std::move(row));
  }
  return rows;
}

DropoutCalibration calibrate_stereo_dropout(const RunConfig& base,
                                            std::span<const std::uint64_t> seeds,
                                            double target_percent) {
  RunConfig config = base;
  config.pipeline.enable_disparity_fusion = false;
  config.pipeline.enable_detection_fusion = false;
  config.pipeline.enable_velocity_filter = true;
  config.pipeline.run_saito = true;
  config.pipeline.run_kalman = false;
  config.pipeline.run_raw_diff = false;

  const auto rate_at = [&](double p) {
    config.scenario.noise.dropout_prob_stereo = p;
    std::vector<double> rates;
    for (const auto& trace : run_seeds(config, seeds)) {
      rates.push_back(measure_non_detection_rate(trace));
    }
    return median(rates);
  };
  double lo = 0.0;
  double hi = 1.0;
  DropoutCalibration best{0.0, rate_at(0.0)};
  for (int iter = 0; iter < 20; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double rate = rate_at(mid);
    if (std::abs(rate - target_percent) < std::abs(best.median_rate - target_percent)) {
      best = {mid, rate};
    }
    (rate < target_percent ? lo : hi) = mid;
  }
  return best;
}

}  // namespace velest
