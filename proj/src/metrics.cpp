#include "infrasteer/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace infrasteer {

void SampleSeries::push(double t, double value) {
  if (!times_.empty()) {
    if (t < times_.back()) {
      throw std::invalid_argument("sample time went backwards");
    }
    if (t == times_.back()) {
      values_.back() = value;
      return;
    }
  }
  times_.push_back(t);
  values_.push_back(value);
}

double correction_metric(double left_applied, double right_applied) {
  return (right_applied - left_applied) / 2.0;
}

RunSummary summarize(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("cannot summarize an empty series");
  }
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) {
    sum += std::abs(v);
  }
  const double mean = sum / n;
  double sq = 0.0;
  for (double v : values) {
    const double d = std::abs(v) - mean;
    sq += d * d;
  }
  RunSummary s;
  s.mean_abs = mean;
  s.std_abs = std::sqrt(sq / n);
  s.count = values.size();
  s.sem = s.std_abs / std::sqrt(n);
  return s;
}

RunSummary summarize(const SampleSeries& series) { return summarize(series.values()); }

SampleSeries post_outage_window(const SampleSeries& series, std::span<const double> outage_ends,
                                std::size_t k) {
  SampleSeries out;
  const auto& times = series.times();
  std::size_t next_unused = 0;
  for (double end : outage_ends) {
    std::size_t i = 0;
    while (i < times.size() && times[i] <= end) {
      ++i;
    }
    i = std::max(i, next_unused);
    for (std::size_t taken = 0; taken < k && i < times.size(); ++taken, ++i) {
      out.push(times[i], series.values()[i]);
    }
    next_unused = std::max(next_unused, i);
  }
  return out;
}

std::optional<double> CrashDetector::update(double t, double deviation) {
  if (std::abs(deviation) <= threshold_) {
    above_since_.reset();
    return std::nullopt;
  }
  if (!above_since_) {
    above_since_ = t;
  }
  // Tolerate rounding in tick-multiple timestamps.
  if (t - *above_since_ >= hold_ - 1e-9) {
    return t;
  }
  return std::nullopt;
}

std::optional<double> detect_crash(const SampleSeries& deviation, double threshold_m,
                                   double hold_s) {
  CrashDetector detector(threshold_m, hold_s);
  for (std::size_t i = 0; i < deviation.size(); ++i) {
    if (auto crash = detector.update(deviation.times()[i], deviation.values()[i])) {
      return crash;
    }
  }
  return std::nullopt;
}

} // namespace infrasteer
