#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. The perception functions transliterate the vision scripts line by
// line, in the scripts' own coordinates; nothing here calls the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace oracle {

constexpr double pi = 3.14159265358979323846;

// ComputeRobotAngle as written, including the possible 360 result.
inline double robot_angle(double greencx, double greency, double orangecx, double orangecy) {
  double ang;
  if ((greencx - orangecx) == 0) {
    if (greency > orangecy) {
      ang = 90;
    } else {
      ang = 270;
    }
  } else {
    ang = 180 / pi * std::atan((orangecy - greency) / (orangecx - greencx));
    if (greencx > orangecx) {
      ang = 180 + ang;
    } else if (ang < 0) {
      ang = 360 + ang;
    }
    ang = 360 - ang;
  }
  return ang;
}

inline double line_angle(double w_min, double h_min, double lineang, double ang) {
  if (w_min > h_min) {
    if (ang > 135) {
      lineang = 180 - lineang;
    } else {
      lineang = -1 * lineang;
    }
  } else {
    if ((ang > 270) || (ang < 45)) {
      lineang = 270 - lineang;
    } else {
      lineang = 90 - lineang;
    }
  }
  return lineang;
}

inline double d_fix(double lineang, double ang) {
  double D_fix = lineang - ang;
  if (D_fix < -300) {
    D_fix += 360;
  } else if (D_fix > 300) {
    D_fix -= 360;
  }
  if (D_fix < -90) {
    D_fix += 180;
  } else if (D_fix > 90) {
    D_fix -= 180;
  }
  return D_fix;
}

// (x_min, y_min) is the line center inside a crop centered on the vehicle
// front, so the front sits at (cropsize, cropsize).
inline double p_fix(double x_min, double y_min, double cropsize, double ang) {
  const double Xcropsize = cropsize;
  const double Ycropsize = cropsize;
  double P_fix;
  if ((x_min - cropsize) == 0) {
    if (ang < 180) {
      P_fix = 90 - ang;
    } else {
      P_fix = 270 - ang;
    }
  } else {
    double temp_angle = 180 / pi * std::atan((Ycropsize - y_min) / (x_min - Xcropsize));
    if (temp_angle < 0) {
      if (ang > 225) {
        temp_angle = 360 + temp_angle;
      } else {
        temp_angle = 180 + temp_angle;
      }
    } else if (ang > 135 && ang < 315) {
      temp_angle = 180 + temp_angle;
    }
    P_fix = temp_angle - ang;
  }
  if (P_fix > 180) {
    P_fix = P_fix - 360;
  } else if (P_fix < -180) {
    P_fix = 360 + P_fix;
  }
  if (P_fix < -90) {
    P_fix += 180;
  } else if (P_fix > 90) {
    P_fix -= 180;
  }
  return P_fix;
}

// Correction after the n-th error, evaluating the decayed sum directly.
inline double pid_correction(const std::vector<double>& errors, double kp, double ki, double kd,
                             double decay) {
  const std::size_t n = errors.size();
  double integral = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    integral += std::pow(decay, static_cast<double>(n - 1 - i)) * errors[i];
  }
  const double previous = n >= 2 ? errors[n - 2] : 0.0;
  return kp * errors[n - 1] + ki * integral + kd * (errors[n - 1] - previous);
}

struct Source {
  double left = 0.0;
  double right = 0.0;
  double confidence = 0.0;
  bool active = false;
};

struct Fused {
  double left = 0.0;
  double right = 0.0;
};

// chosen = max(confidences), then one `if conf == chosen` per source in
// order, so the last tied source wins.
inline std::optional<std::size_t> max_pick(const std::vector<Source>& s) {
  double chosen = 0.0;
  for (const auto& x : s) {
    chosen = std::max(chosen, x.confidence);
  }
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].confidence == chosen) {
      pick = i;
    }
  }
  if (!(chosen > 0.0)) {
    return std::nullopt;
  }
  return pick;
}

inline std::optional<Fused> simple(const std::vector<Source>& s) {
  double l = 0.0;
  double r = 0.0;
  int n = 0;
  for (const auto& x : s) {
    l += x.left;
    r += x.right;
    n += x.active ? 1 : 0;
  }
  if (n == 0) {
    return std::nullopt;
  }
  return Fused{l / n, r / n};
}

inline std::optional<Fused> weighted(const std::vector<Source>& s) {
  double num_l = 0.0;
  double num_r = 0.0;
  double den = 0.0;
  for (const auto& x : s) {
    num_l += x.left * x.confidence;
    num_r += x.right * x.confidence;
    den += x.confidence;
  }
  if (den == 0.0) {
    return std::nullopt;
  }
  return Fused{num_l / den, num_r / den};
}

} // namespace oracle
