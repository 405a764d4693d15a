#include "infrasteer/faults.hpp"

#include <cmath>

#include "infrasteer/world.hpp"

namespace infrasteer {

void validate(const OutageModel& model) {
  if (const auto* p = std::get_if<PeriodicOutage>(&model)) {
    if (!(p->period > 0.0) || !(p->duration >= 0.0) || p->duration > p->period) {
      throw ConfigError("periodic outage needs period > 0 and 0 <= duration <= period");
    }
  } else if (const auto* q = std::get_if<ProbabilisticOutage>(&model)) {
    if (!(q->interval > 0.0) || q->threshold < 0 || q->threshold > 100) {
      throw ConfigError("probabilistic outage needs interval > 0 and threshold in [0, 100]");
    }
  }
}

bool periodic_outage_active(const PeriodicOutage& model, double phase, double now) {
  if (model.duration <= 0.0) {
    return false;
  }
  const double k = std::floor((now - phase) / model.period);
  const double into = now - phase - k * model.period;
  return into < model.duration;
}

OutageSchedule::OutageSchedule(OutageModel model, double phase, std::uint64_t seed)
    : model_(model), phase_(phase), rng_(seed) {
  validate(model_);
}

bool OutageSchedule::active(double now) {
  if (const auto* p = std::get_if<PeriodicOutage>(&model_)) {
    return periodic_outage_active(*p, phase_, now);
  }
  const auto* q = std::get_if<ProbabilisticOutage>(&model_);
  if (q == nullptr) {
    return false;
  }
  const auto index = static_cast<long long>(std::floor((now - phase_) / q->interval));
  if (!interval_index_) {
    interval_index_ = index - 1;
  }
  // One draw per interval boundary, including intervals nobody queried.
  while (*interval_index_ < index) {
    ++*interval_index_;
    interval_active_ = rng_.uniform_int(1, 100) < q->threshold;
  }
  return interval_active_;
}

std::vector<double> OutageSchedule::end_times(double from, double to) const {
  std::vector<double> ends;
  const auto* p = std::get_if<PeriodicOutage>(&model_);
  if (p == nullptr) {
    return ends;
  }
  const double first = std::ceil((from - phase_ - p->duration) / p->period);
  for (double k = first;; k += 1.0) {
    const double end = phase_ + k * p->period + p->duration;
    if (end > to) {
      break;
    }
    if (end >= from) {
      ends.push_back(end);
    }
  }
  return ends;
}

bool outage_active(OutageSchedule& schedule, double now) { return schedule.active(now); }

SteeringCommand gate(const SteeringCommand& cmd, bool active) {
  return active ? SteeringCommand::zero_report() : cmd;
}

} // namespace infrasteer
