#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "infrasteer/command.hpp"
#include "infrasteer/rng.hpp"

namespace infrasteer {

struct NoOutage {};

// Disabled during [phase + k*period, phase + k*period + duration).
struct PeriodicOutage {
  double period = 3.0;
  double duration = 0.0;
};

// At each interval boundary draw 1..100; the whole interval is an outage
// iff the draw is strictly below the threshold.
struct ProbabilisticOutage {
  double interval = 0.4;
  int threshold = 0;
};

using OutageModel = std::variant<NoOutage, PeriodicOutage, ProbabilisticOutage>;

void validate(const OutageModel& model);

bool periodic_outage_active(const PeriodicOutage& model, double phase, double now);

// Per-sensor outage state: the model, this sensor's phase offset and its
// own generator. Queries must use non-decreasing times.
class OutageSchedule {
public:
  OutageSchedule(OutageModel model, double phase, std::uint64_t seed);

  bool active(double now);

  // Ends of the outage windows in [from, to]. Periodic models only;
  // zero-length windows count, so a zero duration still marks each period.
  std::vector<double> end_times(double from, double to) const;

  const OutageModel& model() const { return model_; }
  double phase() const { return phase_; }

private:
  OutageModel model_;
  double phase_;
  Rng rng_;
  std::optional<long long> interval_index_;
  bool interval_active_ = false;
};

bool outage_active(OutageSchedule& schedule, double now);

// Substitutes a zero-report while an outage is active.
SteeringCommand gate(const SteeringCommand& cmd, bool active);

} // namespace infrasteer
