#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "infrasteer/runner.hpp"
#include "infrasteer/scenario.hpp"

namespace infrasteer {

enum class SweepAxis { kp, ki, kd, outage_duration, outage_threshold };

const char* to_string(SweepAxis axis);
std::optional<SweepAxis> parse_sweep_axis(const std::string& text);

struct SweepSpec {
  SweepAxis axis = SweepAxis::kp;
  std::vector<double> values;
  int repetitions = 3;

  void validate() const;
};

// Gains apply to every sensor. Outage axes apply to every sensor whose
// model has that parameter; a scenario with none is a ConfigError.
Scenario apply_axis(const Scenario& scenario, SweepAxis axis, double value);

// Depends only on (seed, value, repetition), so adding repetitions or
// values leaves earlier runs untouched.
std::uint64_t repetition_seed(std::uint64_t seed, double value, int repetition);

// Mean and population standard deviation of |x| over the pooled samples
// of all repetitions.
struct MetricStat {
  double mean = 0.0;
  double std = 0.0;
  std::size_t runs = 0;
  std::size_t count = 0;
};

struct RepetitionOutcome {
  std::uint64_t seed = 0;
  std::optional<double> crash_time;
  double deviation_mean_abs = 0.0;
  double correction_mean_abs = 0.0;
};

struct SweepRow {
  double value = 0.0;
  double crash_rate = 0.0;
  MetricStat deviation;
  MetricStat correction;
  MetricStat post_outage_deviation;
  MetricStat post_outage_correction;
  std::vector<RepetitionOutcome> repetitions;

  bool all_survived() const { return crash_rate == 0.0; }
};

struct SweepTable {
  SweepAxis axis = SweepAxis::kp;
  std::vector<SweepRow> rows;
};

struct SweepOptions {
  // Per-run artifacts go to <out_dir>/<axis>_<value>/rep<r> when set.
  std::optional<std::filesystem::path> out_dir;
  unsigned threads = 0;  // 0: hardware concurrency
};

SweepTable sweep(const Scenario& scenario, const SweepSpec& spec, const SweepOptions& options = {});

inline const std::vector<std::string>& plot_metrics() {
  static const std::vector<std::string> names{"deviation", "correction", "post_outage_deviation",
                                              "post_outage_correction"};
  return names;
}

const MetricStat& metric_of(const SweepRow& row, const std::string& metric);

struct PlotRow {
  double value = 0.0;
  double mean = 0.0;
  double std = 0.0;
  double crash_rate = 0.0;
};

// Writes <dir>/<prefix><metric>.dat per metric: a "# value mean std
// crash_rate" header and one whitespace-separated row per value. Returns
// the files written.
std::vector<std::filesystem::path> emit_plot_data(const SweepTable& table,
                                                  const std::filesystem::path& dir,
                                                  const std::string& prefix = "");
std::vector<PlotRow> parse_plot_data(const std::filesystem::path& file);

// Fixed-width text rendering for the terminal.
std::string format_table(const SweepTable& table);

} // namespace infrasteer
