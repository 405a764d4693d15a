#pragma once

namespace infrasteer {

// One sensor's report to the vehicle. The third wire field is named "error"
// by the original senders but carries the confidence.
struct SteeringCommand {
  double left = 0.0;
  double right = 0.0;
  double confidence = 0.0;
  double p = 0.0;
  double i = 0.0;
  double d = 0.0;

  bool is_zero_report() const {
    return left == 0.0 && right == 0.0 && confidence == 0.0 && p == 0.0 && i == 0.0 &&
           d == 0.0;
  }
  bool operator==(const SteeringCommand&) const = default;

  static SteeringCommand zero_report() { return {}; }
};

} // namespace infrasteer
