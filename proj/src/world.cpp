#include "infrasteer/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace infrasteer {

namespace {

constexpr double kClosureTolerance = 1e-9;
constexpr double kBoardTolerance = 1e-9;
constexpr double kPolylineStep = 0.002;

bool angle_within_sweep(double start_deg, double sweep, double probe_deg) {
  const double rel = normalize_degrees(sweep >= 0 ? probe_deg - start_deg
                                                  : start_deg - probe_deg);
  return rel <= std::abs(sweep) + 1e-12;
}

} // namespace

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 v) { return std::hypot(v.x, v.y); }

Vec2 unit_from_degrees(double deg) {
  const double r = deg_to_rad(deg);
  return {std::cos(r), std::sin(r)};
}

double normalize_degrees(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d < 0.0) {
    d += 360.0;
  }
  if (d >= 360.0) {
    d = 0.0;
  }
  return d;
}

Pose make_pose(double x, double y, double heading) {
  return {x, y, normalize_degrees(heading)};
}

Vec2 to_vehicle_frame(const Pose& pose, Vec2 p) {
  const Vec2 fwd = unit_from_degrees(pose.heading);
  const Vec2 d = p - pose.position();
  return {dot(d, fwd), cross(fwd, d)};
}

Vec2 to_board_frame(const Pose& pose, Vec2 v) {
  const Vec2 fwd = unit_from_degrees(pose.heading);
  const Vec2 left{-fwd.y, fwd.x};
  return pose.position() + fwd * v.x + left * v.y;
}

Vec2 TrackSegment::point_at(double s) const {
  s = std::clamp(s, 0.0, length);
  if (kind == Kind::straight) {
    return start + unit_from_degrees(start_heading) * s;
  }
  const double turn = sweep >= 0 ? 1.0 : -1.0;
  const double phi0 = start_heading - turn * 90.0;
  const double phi = phi0 + sweep * (s / length);
  return center + unit_from_degrees(phi) * radius;
}

double TrackSegment::heading_at(double s) const {
  if (kind == Kind::straight) {
    return start_heading;
  }
  return normalize_degrees(start_heading + sweep * (std::clamp(s, 0.0, length) / length));
}

void TrackSegment::offset_of(Vec2 p, double& signed_offset,
                             double& distance) const {
  if (kind == Kind::straight) {
    const Vec2 dir = unit_from_degrees(start_heading);
    const double along = std::clamp(dot(p - start, dir), 0.0, length);
    const Vec2 nearest = start + dir * along;
    distance = norm(p - nearest);
    signed_offset = cross(dir, p - start) >= 0 ? distance : -distance;
    return;
  }
  const Vec2 rel = p - center;
  const double r = norm(rel);
  const double turn = sweep >= 0 ? 1.0 : -1.0;
  const double phi0 = start_heading - turn * 90.0;
  const double phi = rad_to_deg(std::atan2(rel.y, rel.x));
  if (angle_within_sweep(phi0, sweep, phi)) {
    distance = std::abs(r - radius);
    // The center lies to the left of a left-turning arc.
    signed_offset = turn * (radius - r);
    return;
  }
  const Vec2 ends[2] = {start, end};
  const double headings[2] = {start_heading, heading_at(length)};
  distance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i) {
    const double d = norm(p - ends[i]);
    if (d < distance) {
      distance = d;
      const double side = cross(unit_from_degrees(headings[i]), p - ends[i]);
      signed_offset = side >= 0 ? d : -d;
    }
  }
}

Track Track::from_spec(const TrackSpec& spec) {
  if (!(spec.board_size > 0.0) || !std::isfinite(spec.board_size)) {
    throw TrackError("board_size must be positive");
  }
  if (!(spec.line_width > 0.0) || !std::isfinite(spec.line_width)) {
    throw TrackError("line_width must be positive");
  }
  if (spec.pieces.empty()) {
    throw TrackError("track has no segments");
  }

  Track track;
  track.line_width_ = spec.line_width;
  track.board_size_ = spec.board_size;

  const double lo = -kBoardTolerance;
  const double hi = spec.board_size + kBoardTolerance;
  auto inside = [&](Vec2 p) {
    return p.x >= lo && p.x <= hi && p.y >= lo && p.y <= hi;
  };

  Vec2 cursor = spec.start.position();
  double heading = normalize_degrees(spec.start.heading);
  for (std::size_t i = 0; i < spec.pieces.size(); ++i) {
    TrackSegment seg;
    seg.start = cursor;
    seg.start_heading = heading;
    if (const auto* straight = std::get_if<StraightPiece>(&spec.pieces[i])) {
      if (!(straight->length > 0.0) || !std::isfinite(straight->length)) {
        throw TrackError("segment " + std::to_string(i) + ": length must be positive",
                         static_cast<std::ptrdiff_t>(i));
      }
      seg.kind = TrackSegment::Kind::straight;
      seg.length = straight->length;
      seg.end = cursor + unit_from_degrees(heading) * straight->length;
    } else {
      const auto& arc = std::get<ArcPiece>(spec.pieces[i]);
      if (!(arc.radius > 0.0) || !std::isfinite(arc.radius) || arc.sweep == 0.0 ||
          !std::isfinite(arc.sweep) || std::abs(arc.sweep) > 360.0) {
        throw TrackError("segment " + std::to_string(i) +
                             ": arc needs positive radius and sweep in [-360, 360]",
                         static_cast<std::ptrdiff_t>(i));
      }
      seg.kind = TrackSegment::Kind::arc;
      seg.radius = arc.radius;
      seg.sweep = arc.sweep;
      seg.length = arc.radius * deg_to_rad(std::abs(arc.sweep));
      const double turn = arc.sweep >= 0 ? 1.0 : -1.0;
      seg.center = cursor + unit_from_degrees(heading + turn * 90.0) * arc.radius;
      seg.end = seg.point_at(seg.length);
    }

    bool in_board = inside(seg.start) && inside(seg.end);
    if (seg.kind == TrackSegment::Kind::arc) {
      const double phi0 = heading - (seg.sweep >= 0 ? 90.0 : -90.0);
      for (double axis : {0.0, 90.0, 180.0, 270.0}) {
        if (angle_within_sweep(phi0, seg.sweep, axis)) {
          in_board = in_board && inside(seg.center + unit_from_degrees(axis) * seg.radius);
        }
      }
    }
    if (!in_board) {
      throw TrackError("segment " + std::to_string(i) + " leaves the board",
                       static_cast<std::ptrdiff_t>(i));
    }

    track.segment_offsets_.push_back(track.length_);
    track.length_ += seg.length;
    heading = seg.heading_at(seg.length);
    cursor = seg.end;
    track.segments_.push_back(seg);
  }

  if (norm(cursor - spec.start.position()) > kClosureTolerance) {
    throw TrackError("loop does not close");
  }

  for (const auto& seg : track.segments_) {
    const int steps = std::max(1, static_cast<int>(std::ceil(seg.length / kPolylineStep)));
    for (int k = 0; k < steps; ++k) {
      track.polyline_.push_back(seg.point_at(seg.length * k / steps));
    }
  }
  track.polyline_.push_back(track.polyline_.front());
  return track;
}

Pose Track::start_pose() const {
  return {segments_.front().start.x, segments_.front().start.y,
          segments_.front().start_heading};
}

Vec2 Track::point_at(double s) const {
  s = std::fmod(s, length_);
  if (s < 0) {
    s += length_;
  }
  auto it = std::upper_bound(segment_offsets_.begin(), segment_offsets_.end(), s);
  const std::size_t idx = static_cast<std::size_t>(std::distance(segment_offsets_.begin(), it)) - 1;
  return segments_[idx].point_at(s - segment_offsets_[idx]);
}

double Track::heading_at(double s) const {
  s = std::fmod(s, length_);
  if (s < 0) {
    s += length_;
  }
  auto it = std::upper_bound(segment_offsets_.begin(), segment_offsets_.end(), s);
  const std::size_t idx = static_cast<std::size_t>(std::distance(segment_offsets_.begin(), it)) - 1;
  return segments_[idx].heading_at(s - segment_offsets_[idx]);
}

Track track_from_config(const TrackSpec& spec) { return Track::from_spec(spec); }

double lateral_deviation(const Track& track, const Pose& pose) {
  double best_distance = std::numeric_limits<double>::infinity();
  double best_offset = 0.0;
  for (const auto& seg : track.segments()) {
    double offset = 0.0;
    double distance = 0.0;
    seg.offset_of(pose.position(), offset, distance);
    if (distance < best_distance) {
      best_distance = distance;
      best_offset = offset;
    }
  }
  return best_offset;
}

void VehicleParams::validate() const {
  if (!(wheel_separation > 0.0) || !(power_to_speed > 0.0) || !(max_power > 0.0) ||
      !(nominal_power > 0.0)) {
    throw ConfigError("vehicle parameters must be positive");
  }
  if (!(marker_offset > 0.0) || !(body_half_length > 0.0) || !(body_half_width > 0.0)) {
    throw ConfigError("vehicle body dimensions must be positive");
  }
  if (!(motor_time_constant >= 0.0)) {
    throw ConfigError("motor time constant must be non-negative");
  }
}

WheelPowers motor_response(WheelPowers current, double left_cmd, double right_cmd, double dt,
                           const VehicleParams& params) {
  if (params.motor_time_constant <= 0.0) {
    return {left_cmd, right_cmd};
  }
  const double a = 1.0 - std::exp(-dt / params.motor_time_constant);
  return {current.left + a * (left_cmd - current.left),
          current.right + a * (right_cmd - current.right)};
}

Pose step_vehicle(const Pose& pose, double left, double right, double dt,
                  const VehicleParams& params) {
  left = std::clamp(left, 0.0, params.max_power);
  right = std::clamp(right, 0.0, params.max_power);
  const double v = params.power_to_speed * (left + right) / 2.0;
  const double omega = params.power_to_speed * (right - left) / params.wheel_separation;

  const double theta = deg_to_rad(pose.heading);
  Pose next = pose;
  if (left == right) {
    next.x += v * dt * std::cos(theta);
    next.y += v * dt * std::sin(theta);
    return next;
  }
  const double theta1 = theta + omega * dt;
  const double radius = v / omega;
  next.x += radius * (std::sin(theta1) - std::sin(theta));
  next.y -= radius * (std::cos(theta1) - std::cos(theta));
  next.heading = normalize_degrees(rad_to_deg(theta1));
  return next;
}

TrackSpec reference_track_spec() {
  TrackSpec spec;
  spec.board_size = 2.0;
  spec.line_width = 0.02;
  spec.start = {0.4, 0.3, 0.0};
  for (int side = 0; side < 4; ++side) {
    spec.pieces.emplace_back(StraightPiece{side % 2 == 0 ? 1.0 : 0.75});
    spec.pieces.emplace_back(ArcPiece{0.2, 90.0});
  }
  return spec;
}

} // namespace infrasteer
