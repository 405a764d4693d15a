#pragma once

#include <optional>

#include "infrasteer/rng.hpp"
#include "infrasteer/world.hpp"

namespace infrasteer {

enum class CameraKind { onboard, infrastructure };

const char* to_string(CameraKind kind);

// Axis-aligned board-space rectangle, meters.
struct BoardRect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

struct CameraModel {
  CameraKind kind = CameraKind::onboard;
  int image_width = 320;
  int image_height = 240;
  // Board region the camera can see; empty means the whole board.
  std::optional<BoardRect> coverage;
  double pixels_per_meter = 1000.0;
  // Infrastructure: look-ahead half-window. Onboard: height of the bottom strip.
  double crop_size = 80.0;
  // Onboard: distance from the vehicle center to the near edge of the strip.
  double lookahead = 0.05;
  // Infrastructure: board point imaged at pixel (0, image_height).
  Vec2 origin;
  // Half-width of the uniform jitter added to observed centers.
  double noise_px = 2.0;
  // Below this fraction the line region is too small to be found.
  double min_visible_fraction = 0.05;
  // Infrastructure: board point under the camera. Resolution drops with
  // distance from it as 1 / (1 + falloff * distance), which shrinks the line
  // area and enlarges the pixel jitter in board terms.
  std::optional<Vec2> mount;
  double falloff = 0.0;

  // Local resolution relative to pixels_per_meter at board point p.
  double resolution_at(Vec2 p) const;

  void validate() const;

  static CameraModel onboard_default();
  static CameraModel infrastructure_default();
};

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
};

struct MarkerObservation {
  PixelPoint green_center;
  PixelPoint orange_center;
  bool visible = false;
};

struct LineBoxObservation {
  PixelPoint center;
  double width = 0.0;
  double height = 0.0;
  double raw_angle = 0.0;
  double visible_fraction = 0.0;
};

struct Observation {
  CameraKind kind = CameraKind::onboard;
  MarkerObservation markers;
  LineBoxObservation line;
};

// Projects the vehicle markers and the look-ahead line region into the
// camera image. Pass a generator to add pixel jitter; nullptr observes
// exactly.
Observation observe(const CameraModel& camera, const Track& track, const Pose& pose,
                    const VehicleParams& vehicle, Rng* noise = nullptr);

// Heading in [0, 360) of the vector from the green to the orange marker,
// image coordinates with y growing downward. Throws std::invalid_argument
// for coincident points.
double compute_robot_angle(PixelPoint green, PixelPoint orange);

// Middle of the vehicle's leading edge, half a marker spacing past orange.
PixelPoint front_center(PixelPoint green, PixelPoint orange);

// Resolves a best-fit-rectangle angle in [-90, 0] to a line direction in
// [0, 360) using the box aspect and the vehicle heading.
double disambiguate_line_angle(double width, double height, double raw_angle,
                               double vehicle_angle);

struct FoldedLineBox {
  double width = 0.0;
  double height = 0.0;
  double raw_angle = 0.0;
};

// Inverse of the rectangle-fitting convention: a line at `line_angle`
// degrees (image, y up) of the given length and thickness.
FoldedLineBox fold_line_angle(double line_angle, double length, double thickness);

double direction_fix(double line_angle, double vehicle_angle);
double position_fix(PixelPoint front, PixelPoint line_center, double vehicle_angle);

double onboard_offset(double x_min, double image_center_x = 160.0);
double confidence_from_visibility(double fraction, CameraKind kind);

// What one sensor concludes from one frame.
struct SensorReading {
  bool visible = false;
  // deltaX for the onboard camera, P_fix for infrastructure.
  double error = 0.0;
  // D_fix; infrastructure only.
  std::optional<double> direction;
  double confidence = 0.0;
};

SensorReading read_sensor(const CameraModel& camera, const Observation& obs);

} // namespace infrasteer
