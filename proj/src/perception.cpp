#include "infrasteer/perception.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace infrasteer {

const char* to_string(CameraKind kind) {
  return kind == CameraKind::onboard ? "onboard" : "infrastructure";
}

void CameraModel::validate() const {
  if (image_width <= 0 || image_height <= 0) {
    throw ConfigError("camera image dimensions must be positive");
  }
  if (!(crop_size > 0.0) || crop_size >= std::min(image_width, image_height) / 2.0) {
    throw ConfigError("camera crop_size must be positive and below half the smaller image side");
  }
  if (!(pixels_per_meter > 0.0) || !std::isfinite(pixels_per_meter)) {
    throw ConfigError("camera pixels_per_meter must be positive");
  }
  if (!(noise_px >= 0.0) || !std::isfinite(noise_px)) {
    throw ConfigError("camera noise must be non-negative");
  }
  if (!(lookahead >= 0.0)) {
    throw ConfigError("camera lookahead must be non-negative");
  }
  if (!(min_visible_fraction >= 0.0 && min_visible_fraction <= 1.0)) {
    throw ConfigError("camera min_visible_fraction must be in [0, 1]");
  }
  if (!(falloff >= 0.0) || !std::isfinite(falloff)) {
    throw ConfigError("camera falloff must be non-negative");
  }
  if (coverage && (coverage->x1 <= coverage->x0 || coverage->y1 <= coverage->y0)) {
    throw ConfigError("camera coverage rectangle is empty");
  }
}

double CameraModel::resolution_at(Vec2 p) const {
  if (!mount) {
    return 1.0;
  }
  return 1.0 / (1.0 + falloff * norm(p - *mount));
}

CameraModel CameraModel::onboard_default() {
  CameraModel cam;
  cam.kind = CameraKind::onboard;
  cam.image_width = 320;
  cam.image_height = 240;
  cam.crop_size = 80.0;
  cam.pixels_per_meter = 1000.0;
  cam.lookahead = 0.05;
  return cam;
}

CameraModel CameraModel::infrastructure_default() {
  CameraModel cam;
  cam.kind = CameraKind::infrastructure;
  cam.image_width = 1280;
  cam.image_height = 720;
  cam.crop_size = 75.0;
  cam.pixels_per_meter = 360.0;
  cam.lookahead = 0.0;
  return cam;
}

namespace {

struct Interval {
  double t0;
  double t1;
};

// Liang-Barsky clip of a + t (b - a), t in [lo, hi], to an axis-aligned box.
bool clip_to_box(Vec2 a, Vec2 b, double x0, double y0, double x1, double y1,
                 Interval& range) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - x0, x1 - a.x, a.y - y0, y1 - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) {
        return false;
      }
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      range.t0 = std::max(range.t0, r);
    } else {
      range.t1 = std::min(range.t1, r);
    }
  }
  return range.t0 < range.t1;
}

struct Piece {
  std::size_t segment;
  Interval range;
};

struct Component {
  double length = 0.0;
  Vec2 weighted_center;
  Vec2 doubled_direction;
};

struct Clip {
  // All in board frame unless stated.
  BoardRect box;
  std::optional<BoardRect> coverage;
  // Vehicle-frame box the line must lie inside (onboard strip).
  std::optional<BoardRect> keep_vehicle;
  // Vehicle-frame box hiding the line (vehicle body, seen from above).
  std::optional<BoardRect> hide_vehicle;
};

void visible_pieces(const std::vector<Vec2>& poly, const Pose& pose, const Clip& clip,
                    std::vector<Piece>& out) {
  const double bx0 = clip.coverage ? std::max(clip.box.x0, clip.coverage->x0) : clip.box.x0;
  const double by0 = clip.coverage ? std::max(clip.box.y0, clip.coverage->y0) : clip.box.y0;
  const double bx1 = clip.coverage ? std::min(clip.box.x1, clip.coverage->x1) : clip.box.x1;
  const double by1 = clip.coverage ? std::min(clip.box.y1, clip.coverage->y1) : clip.box.y1;
  if (bx0 >= bx1 || by0 >= by1) {
    return;
  }
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[i + 1];
    if (std::max(a.x, b.x) < bx0 || std::min(a.x, b.x) > bx1 || std::max(a.y, b.y) < by0 ||
        std::min(a.y, b.y) > by1) {
      continue;
    }
    Interval range{0.0, 1.0};
    if (!clip_to_box(a, b, bx0, by0, bx1, by1, range)) {
      continue;
    }
    const Vec2 va = to_vehicle_frame(pose, a);
    const Vec2 vb = to_vehicle_frame(pose, b);
    if (clip.keep_vehicle) {
      const auto& k = *clip.keep_vehicle;
      if (!clip_to_box(va, vb, k.x0, k.y0, k.x1, k.y1, range)) {
        continue;
      }
    }
    if (clip.hide_vehicle) {
      const auto& h = *clip.hide_vehicle;
      Interval hidden = range;
      if (clip_to_box(va, vb, h.x0, h.y0, h.x1, h.y1, hidden)) {
        if (hidden.t0 > range.t0) {
          out.push_back({i, {range.t0, hidden.t0}});
        }
        if (hidden.t1 < range.t1) {
          out.push_back({i, {hidden.t1, range.t1}});
        }
        continue;
      }
    }
    out.push_back({i, range});
  }
}

// Largest connected run of visible pieces along the closed polyline.
std::optional<Component> largest_component(const std::vector<Vec2>& poly,
                                           const std::vector<Piece>& pieces) {
  if (pieces.empty()) {
    return std::nullopt;
  }
  constexpr double eps = 1e-12;
  const std::size_t last_segment = poly.size() - 2;
  auto joins = [&](const Piece& prev, const Piece& next) {
    const bool adjacent = next.segment == prev.segment + 1 ||
                          (prev.segment == last_segment && next.segment == 0);
    return adjacent && prev.range.t1 >= 1.0 - eps && next.range.t0 <= eps;
  };

  std::vector<Component> comps;
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    if (j == 0 || !joins(pieces[j - 1], pieces[j])) {
      comps.emplace_back();
    }
    const Piece& p = pieces[j];
    const Vec2 a = poly[p.segment];
    const Vec2 d = poly[p.segment + 1] - a;
    const double len = norm(d) * (p.range.t1 - p.range.t0);
    const Vec2 mid = a + d * ((p.range.t0 + p.range.t1) / 2.0);
    const double theta = std::atan2(d.y, d.x);
    Component& c = comps.back();
    c.length += len;
    c.weighted_center = c.weighted_center + mid * len;
    c.doubled_direction = c.doubled_direction + Vec2{std::cos(2 * theta), std::sin(2 * theta)} * len;
  }
  if (comps.size() > 1 && joins(pieces.back(), pieces.front())) {
    Component& head = comps.front();
    const Component& tail = comps.back();
    head.length += tail.length;
    head.weighted_center = head.weighted_center + tail.weighted_center;
    head.doubled_direction = head.doubled_direction + tail.doubled_direction;
    comps.pop_back();
  }

  const Component* best = nullptr;
  for (const auto& c : comps) {
    if (best == nullptr || c.length > best->length) {
      best = &c;
    }
  }
  if (best == nullptr || best->length <= 0.0) {
    return std::nullopt;
  }
  return *best;
}

double jitter(Rng* rng, double amplitude) {
  return (rng != nullptr && amplitude > 0.0) ? rng->uniform(-amplitude, amplitude) : 0.0;
}

PixelPoint board_to_image(const CameraModel& cam, Vec2 p) {
  return {(p.x - cam.origin.x) * cam.pixels_per_meter,
          cam.image_height - (p.y - cam.origin.y) * cam.pixels_per_meter};
}

Vec2 image_to_board(const CameraModel& cam, PixelPoint px) {
  return {cam.origin.x + px.x / cam.pixels_per_meter,
          cam.origin.y + (cam.image_height - px.y) / cam.pixels_per_meter};
}

bool in_image(const CameraModel& cam, PixelPoint p) {
  return p.x >= 0.0 && p.x <= cam.image_width && p.y >= 0.0 && p.y <= cam.image_height;
}

BoardRect board_extent(const Track& track) {
  return {0.0, 0.0, track.board_size(), track.board_size()};
}

void fill_line_box(LineBoxObservation& line, double angle_deg, double length_px,
                   double thickness_px) {
  const FoldedLineBox box = fold_line_angle(angle_deg, length_px, thickness_px);
  line.width = box.width;
  line.height = box.height;
  line.raw_angle = box.raw_angle;
}

Observation observe_onboard(const CameraModel& cam, const Track& track, const Pose& pose,
                            Rng* noise) {
  Observation obs;
  obs.kind = CameraKind::onboard;
  // The vehicle does not see its own marker panels.
  obs.markers.visible = false;

  const double half_width = cam.image_width / 2.0 / cam.pixels_per_meter;
  const double depth = cam.crop_size / cam.pixels_per_meter;
  const BoardRect strip{cam.lookahead, -half_width, cam.lookahead + depth, half_width};

  // Board-frame bounds of the strip for the coarse filter.
  BoardRect box{1e300, 1e300, -1e300, -1e300};
  for (Vec2 corner : {Vec2{strip.x0, strip.y0}, Vec2{strip.x0, strip.y1},
                      Vec2{strip.x1, strip.y0}, Vec2{strip.x1, strip.y1}}) {
    const Vec2 b = to_board_frame(pose, corner);
    box.x0 = std::min(box.x0, b.x);
    box.y0 = std::min(box.y0, b.y);
    box.x1 = std::max(box.x1, b.x);
    box.y1 = std::max(box.y1, b.y);
  }

  Clip clip;
  clip.box = box;
  clip.coverage = cam.coverage.value_or(board_extent(track));
  clip.keep_vehicle = strip;

  std::vector<Piece> pieces;
  visible_pieces(track.polyline(), pose, clip, pieces);
  const auto comp = largest_component(track.polyline(), pieces);
  if (!comp) {
    return obs;
  }

  const Vec2 center = to_vehicle_frame(pose, comp->weighted_center * (1.0 / comp->length));
  const double board_axis = rad_to_deg(std::atan2(comp->doubled_direction.y,
                                                  comp->doubled_direction.x)) / 2.0;
  // Forward maps to image up, so a line along the heading reads 90 degrees.
  const double image_axis = board_axis - pose.heading + 90.0;

  obs.line.visible_fraction = std::min(1.0, comp->length / depth);
  obs.line.center.x = std::clamp(cam.image_width / 2.0 - center.y * cam.pixels_per_meter +
                                     jitter(noise, cam.noise_px),
                                 0.0, static_cast<double>(cam.image_width));
  obs.line.center.y = cam.image_height - (center.x - cam.lookahead) * cam.pixels_per_meter;
  fill_line_box(obs.line, image_axis, comp->length * cam.pixels_per_meter,
                track.line_width() * cam.pixels_per_meter);
  return obs;
}

double crop_half(double center, double extent, double crop) {
  if (center > extent - crop) {
    return extent - center;
  }
  if (center < crop) {
    return center;
  }
  return crop;
}

Observation observe_infrastructure(const CameraModel& cam, const Track& track, const Pose& pose,
                                   const VehicleParams& vehicle, Rng* noise) {
  Observation obs;
  obs.kind = CameraKind::infrastructure;

  const BoardRect coverage = cam.coverage.value_or(board_extent(track));
  const Vec2 fwd = unit_from_degrees(pose.heading);
  const Vec2 green_board = pose.position() - fwd * vehicle.marker_offset;
  const Vec2 orange_board = pose.position() + fwd * vehicle.marker_offset;
  if (!coverage.contains(green_board) || !coverage.contains(orange_board)) {
    return obs;
  }
  PixelPoint green = board_to_image(cam, green_board);
  PixelPoint orange = board_to_image(cam, orange_board);
  if (!in_image(cam, green) || !in_image(cam, orange)) {
    return obs;
  }
  const double scale = cam.resolution_at(pose.position());
  const double jitter_px = cam.noise_px / scale;
  green.x += jitter(noise, jitter_px);
  green.y += jitter(noise, jitter_px);
  orange.x += jitter(noise, jitter_px);
  orange.y += jitter(noise, jitter_px);
  obs.markers = {green, orange, true};

  const PixelPoint front = front_center(green, orange);
  const double half_x = crop_half(front.x, cam.image_width, cam.crop_size);
  const double half_y = crop_half(front.y, cam.image_height, cam.crop_size);
  if (!(half_x > 0.0) || !(half_y > 0.0)) {
    return obs;
  }
  const Vec2 top_left = image_to_board(cam, {std::abs(front.x - half_x), std::abs(front.y - half_y)});
  const Vec2 bottom_right =
      image_to_board(cam, {std::abs(front.x + half_x), std::abs(front.y + half_y)});

  Clip clip;
  clip.box = {top_left.x, bottom_right.y, bottom_right.x, top_left.y};
  clip.coverage = coverage;
  clip.hide_vehicle = BoardRect{-vehicle.body_half_length, -vehicle.body_half_width,
                                vehicle.body_half_length, vehicle.body_half_width};

  std::vector<Piece> pieces;
  visible_pieces(track.polyline(), pose, clip, pieces);
  const auto comp = largest_component(track.polyline(), pieces);
  if (!comp) {
    return obs;
  }

  const double nominal = cam.crop_size / cam.pixels_per_meter;
  obs.line.visible_fraction = std::min(1.0, comp->length / nominal) * scale * scale;
  obs.line.center = board_to_image(cam, comp->weighted_center * (1.0 / comp->length));
  obs.line.center.x += jitter(noise, jitter_px);
  obs.line.center.y += jitter(noise, jitter_px);
  const double axis = rad_to_deg(std::atan2(comp->doubled_direction.y,
                                            comp->doubled_direction.x)) / 2.0;
  fill_line_box(obs.line, axis, comp->length * cam.pixels_per_meter,
                track.line_width() * cam.pixels_per_meter);
  return obs;
}

} // namespace

Observation observe(const CameraModel& camera, const Track& track, const Pose& pose,
                    const VehicleParams& vehicle, Rng* noise) {
  if (camera.kind == CameraKind::onboard) {
    return observe_onboard(camera, track, pose, noise);
  }
  return observe_infrastructure(camera, track, pose, vehicle, noise);
}

double compute_robot_angle(PixelPoint green, PixelPoint orange) {
  if (green.x == orange.x && green.y == orange.y) {
    throw std::invalid_argument("degenerate marker pair");
  }
  double ang = 0.0;
  if (green.x - orange.x == 0.0) {
    ang = green.y > orange.y ? 90.0 : 270.0;
  } else {
    ang = 180.0 / kPi * std::atan((orange.y - green.y) / (orange.x - green.x));
    if (green.x > orange.x) {
      ang = 180.0 + ang;
    } else if (ang < 0.0) {
      ang = 360.0 + ang;
    }
    ang = 360.0 - ang;
  }
  return ang >= 360.0 ? ang - 360.0 : ang;
}

PixelPoint front_center(PixelPoint green, PixelPoint orange) {
  const double xlen = green.x - orange.x;
  const double ylen = green.y - orange.y;
  return {orange.x - xlen / 2.0, orange.y - ylen / 2.0};
}

double disambiguate_line_angle(double width, double height, double raw_angle,
                               double vehicle_angle) {
  if (width > height) {
    return vehicle_angle > 135.0 ? 180.0 - raw_angle : -raw_angle;
  }
  if (vehicle_angle > 270.0 || vehicle_angle < 45.0) {
    return 270.0 - raw_angle;
  }
  return 90.0 - raw_angle;
}

FoldedLineBox fold_line_angle(double line_angle, double length, double thickness) {
  double axis = std::fmod(line_angle, 180.0);
  if (axis < 0.0) {
    axis += 180.0;
  }
  if (axis <= 90.0) {
    return {length, thickness, -axis};
  }
  return {thickness, length, 90.0 - axis};
}

double direction_fix(double line_angle, double vehicle_angle) {
  double d = line_angle - vehicle_angle;
  if (d < -300.0) {
    d += 360.0;
  } else if (d > 300.0) {
    d -= 360.0;
  }
  if (d < -90.0) {
    d += 180.0;
  } else if (d > 90.0) {
    d -= 180.0;
  }
  return d;
}

double position_fix(PixelPoint front, PixelPoint line_center, double vehicle_angle) {
  if (front.x == line_center.x && front.y == line_center.y) {
    return 0.0;
  }
  double p = 0.0;
  if (line_center.x - front.x == 0.0) {
    p = vehicle_angle < 180.0 ? 90.0 - vehicle_angle : 270.0 - vehicle_angle;
  } else {
    double offset = 180.0 / kPi * std::atan((front.y - line_center.y) / (line_center.x - front.x));
    if (offset < 0.0) {
      offset += vehicle_angle > 225.0 ? 360.0 : 180.0;
    } else if (vehicle_angle > 135.0 && vehicle_angle < 315.0) {
      offset += 180.0;
    }
    p = offset - vehicle_angle;
  }
  if (p > 180.0) {
    p -= 360.0;
  } else if (p < -180.0) {
    p += 360.0;
  }
  if (p < -90.0) {
    p += 180.0;
  } else if (p > 90.0) {
    p -= 180.0;
  }
  return p;
}

double onboard_offset(double x_min, double image_center_x) {
  return 0.333 * (image_center_x - x_min);
}

double confidence_from_visibility(double fraction, CameraKind /*kind*/) {
  return static_cast<double>(std::lround(100.0 * std::clamp(fraction, 0.0, 1.0)));
}

SensorReading read_sensor(const CameraModel& camera, const Observation& obs) {
  SensorReading reading;
  if (obs.line.visible_fraction <= 0.0 ||
      obs.line.visible_fraction < camera.min_visible_fraction) {
    return reading;
  }
  if (obs.kind == CameraKind::onboard) {
    reading.visible = true;
    reading.error = onboard_offset(obs.line.center.x, camera.image_width / 2.0);
    reading.confidence = confidence_from_visibility(obs.line.visible_fraction, obs.kind);
    return reading;
  }
  if (!obs.markers.visible) {
    return reading;
  }
  const PixelPoint green = obs.markers.green_center;
  const PixelPoint orange = obs.markers.orange_center;
  if (green.x == orange.x && green.y == orange.y) {
    return reading;
  }
  const double ang = compute_robot_angle(green, orange);
  const double line_ang =
      disambiguate_line_angle(obs.line.width, obs.line.height, obs.line.raw_angle, ang);
  reading.visible = true;
  reading.direction = direction_fix(line_ang, ang);
  reading.error = position_fix(front_center(green, orange), obs.line.center, ang);
  reading.confidence = confidence_from_visibility(obs.line.visible_fraction, obs.kind);
  return reading;
}

} // namespace infrasteer
