#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace infrasteer {

// Timestamped samples of one metric. A sample at the same time as the last
// one replaces it, so timestamps stay strictly increasing.
class SampleSeries {
public:
  // Throws std::invalid_argument if t goes backwards.
  void push(double t, double value);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }

private:
  std::vector<double> times_;
  std::vector<double> values_;
};

struct RunSummary {
  double mean_abs = 0.0;
  // Population standard deviation of |x|.
  double std_abs = 0.0;
  std::size_t count = 0;
  // Standard error of the mean, std_abs / sqrt(count).
  double sem = 0.0;
  std::optional<double> crash_time;
};

// Signed applied correction, (right - left) / 2.
double correction_metric(double left_applied, double right_applied);

// Throws std::invalid_argument for an empty input.
RunSummary summarize(std::span<const double> values);
RunSummary summarize(const SampleSeries& series);

// The first k samples strictly after each outage end, without repeats.
SampleSeries post_outage_window(const SampleSeries& series, std::span<const double> outage_ends,
                                std::size_t k = 5);

// Online form of detect_crash.
class CrashDetector {
public:
  CrashDetector(double threshold_m, double hold_s) : threshold_(threshold_m), hold_(hold_s) {}

  // Returns the crash time once |deviation| has exceeded the threshold
  // continuously for the hold time.
  std::optional<double> update(double t, double deviation);

private:
  double threshold_;
  double hold_;
  std::optional<double> above_since_;
};

std::optional<double> detect_crash(const SampleSeries& deviation, double threshold_m,
                                   double hold_s);

} // namespace infrasteer
