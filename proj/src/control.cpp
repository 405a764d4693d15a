#include "infrasteer/control.hpp"

#include <cmath>

#include "infrasteer/world.hpp"

namespace infrasteer {

void PidGains::validate() const {
  for (double g : {kp, ki, kd}) {
    if (!std::isfinite(g) || g < 0.0) {
      throw ConfigError("PID gains must be finite and non-negative");
    }
  }
}

PidStep pid_update(const PidState& state, const PidGains& gains, double error,
                   std::optional<double> external_derivative) {
  PidStep step;
  step.state = state;
  step.state.integral = error + state.decay * state.integral;
  step.derivative = external_derivative.value_or(error - state.last_error);
  step.state.last_error = error;
  step.correction =
      gains.kp * error + gains.ki * step.state.integral + gains.kd * step.derivative;
  return step;
}

std::pair<double, double> commands_from_correction(double correction) {
  return {std::trunc(100.0 - correction), std::trunc(100.0 + correction)};
}

SensorTick sensor_tick(const SensorReading& reading, const PidState& state,
                       const PidGains& gains) {
  if (!reading.visible) {
    return {state, SteeringCommand::zero_report()};
  }
  const PidStep step = pid_update(state, gains, reading.error, reading.direction);
  const auto [left, right] = commands_from_correction(step.correction);
  SteeringCommand cmd;
  cmd.left = left;
  cmd.right = right;
  cmd.confidence = reading.confidence;
  cmd.p = reading.error;
  cmd.i = step.state.integral;
  cmd.d = step.derivative;
  return {step.state, cmd};
}

} // namespace infrasteer
