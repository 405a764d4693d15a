#pragma once

#include <optional>
#include <utility>

#include "infrasteer/command.hpp"
#include "infrasteer/perception.hpp"

namespace infrasteer {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;

  void validate() const;

  static PidGains onboard_default() { return {1.5, 0.15, 4.5}; }
  static PidGains infrastructure_default() { return {1.0, 0.02, 0.5}; }
};

// Integral is the decayed sum  I_n = x_n + decay * I_{n-1}.
struct PidState {
  double integral = 0.0;
  double last_error = 0.0;
  double decay = 0.9;

  bool operator==(const PidState&) const = default;
};

struct PidStep {
  PidState state;
  double correction = 0.0;
  double derivative = 0.0;
};

// When `external_derivative` is given (an image-derived direction error) it
// replaces the first difference of the error.
PidStep pid_update(const PidState& state, const PidGains& gains, double error,
                   std::optional<double> external_derivative = std::nullopt);

// (left, right) = trunc(100 -+ correction).
std::pair<double, double> commands_from_correction(double correction);

struct SensorTick {
  PidState state;
  SteeringCommand command;
};

// Invisible readings produce a zero-report and leave the state untouched.
SensorTick sensor_tick(const SensorReading& reading, const PidState& state,
                       const PidGains& gains);

} // namespace infrasteer
