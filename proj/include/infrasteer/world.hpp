#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace infrasteer {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;
};

double dot(Vec2 a, Vec2 b);
double cross(Vec2 a, Vec2 b);
double norm(Vec2 v);
Vec2 unit_from_degrees(double deg);

constexpr double kPi = 3.14159265358979323846;
constexpr double deg_to_rad(double d) { return d * kPi / 180.0; }
constexpr double rad_to_deg(double r) { return r * 180.0 / kPi; }

// Maps any finite angle in degrees onto [0, 360).
double normalize_degrees(double deg);

// Board position in meters; heading in degrees counterclockwise from +x.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

Pose make_pose(double x, double y, double heading);

// Expresses a board point in the vehicle frame: x forward, y to the left.
Vec2 to_vehicle_frame(const Pose& pose, Vec2 board_point);
Vec2 to_board_frame(const Pose& pose, Vec2 vehicle_point);

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class TrackError : public ConfigError {
public:
  TrackError(const std::string& what, std::ptrdiff_t segment_index = -1)
      : ConfigError(what), segment_index_(segment_index) {}

  // -1 when the error is not tied to one segment.
  std::ptrdiff_t segment_index() const { return segment_index_; }

private:
  std::ptrdiff_t segment_index_;
};

struct StraightPiece {
  double length = 0.0;
};

// Positive sweep turns left (counterclockwise).
struct ArcPiece {
  double radius = 0.0;
  double sweep = 0.0;
};

using TrackPiece = std::variant<StraightPiece, ArcPiece>;

// Turtle-style description: pieces are laid end to end from the start pose.
struct TrackSpec {
  Pose start;
  std::vector<TrackPiece> pieces;
  double line_width = 0.02;
  double board_size = 2.0;
};

struct TrackSegment {
  enum class Kind { straight, arc };

  Kind kind = Kind::straight;
  Vec2 start;
  Vec2 end;
  double start_heading = 0.0;
  double length = 0.0;
  Vec2 center;
  double radius = 0.0;
  double sweep = 0.0;

  Vec2 point_at(double s) const;
  double heading_at(double s) const;
  // Signed offset of p from this segment's centerline (left positive) and
  // the unsigned distance to the nearest point on the segment.
  void offset_of(Vec2 p, double& signed_offset, double& distance) const;
};

class Track {
public:
  // Throws TrackError for non-closing loops, bad dimensions, or segments
  // leaving the board.
  static Track from_spec(const TrackSpec& spec);

  const std::vector<TrackSegment>& segments() const { return segments_; }
  double length() const { return length_; }
  double line_width() const { return line_width_; }
  double board_size() const { return board_size_; }
  Pose start_pose() const;

  // Closed dense sampling of the centerline; front() == back().
  const std::vector<Vec2>& polyline() const { return polyline_; }

  Vec2 point_at(double s) const;
  double heading_at(double s) const;

private:
  std::vector<TrackSegment> segments_;
  std::vector<double> segment_offsets_;
  std::vector<Vec2> polyline_;
  double length_ = 0.0;
  double line_width_ = 0.0;
  double board_size_ = 0.0;
};

Track track_from_config(const TrackSpec& spec);

// Signed perpendicular distance to the nearest centerline point; positive
// when the vehicle is left of the direction of travel.
double lateral_deviation(const Track& track, const Pose& pose);

struct VehicleParams {
  double wheel_separation = 0.12;
  double power_to_speed = 0.25 / (100.0 / 3.0);
  double max_power = 255.0;
  double nominal_power = 100.0 / 3.0;
  // Marker panel centers sit this far behind/ahead of the vehicle center.
  double marker_offset = 0.05;
  double body_half_length = 0.10;
  double body_half_width = 0.07;
  // First-order lag of wheel power behind the commanded power; 0 is instant.
  double motor_time_constant = 0.0;

  double nominal_speed() const { return power_to_speed * nominal_power; }
  void validate() const;
};

// Exact arc integration of differential-drive kinematics. Powers are
// clamped into [0, max_power].
Pose step_vehicle(const Pose& pose, double left, double right, double dt,
                  const VehicleParams& params);

struct WheelPowers {
  double left = 0.0;
  double right = 0.0;
};

// Advances the wheel powers toward the command over dt.
WheelPowers motor_response(WheelPowers current, double left_cmd, double right_cmd, double dt,
                           const VehicleParams& params);

// Rounded rectangle used by the shipped scenarios.
TrackSpec reference_track_spec();

} // namespace infrasteer
