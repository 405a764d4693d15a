#include "infrasteer/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace infrasteer {

namespace {

std::string join_key(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

[[noreturn]] void fail(const std::string& key, const std::string& message) {
  throw ConfigError(key + ": " + message);
}

void check_keys(const YAML::Node& node, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) {
    fail(path.empty() ? "<root>" : path, "expected a mapping");
  }
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!ok.contains(key)) {
      throw ConfigError("unknown key: " + join_key(path, key));
    }
  }
}

double as_number(const YAML::Node& node, const std::string& key) {
  try {
    const double v = node.as<double>();
    if (!std::isfinite(v)) {
      fail(key, "must be finite");
    }
    return v;
  } catch (const YAML::Exception&) {
    fail(key, "expected a number");
  }
}

double number_or(const YAML::Node& parent, const char* name, const std::string& path,
                 double fallback) {
  const YAML::Node node = parent[name];
  return node ? as_number(node, join_key(path, name)) : fallback;
}

std::string string_or(const YAML::Node& parent, const char* name, const std::string& path,
                      const std::string& fallback) {
  const YAML::Node node = parent[name];
  if (!node) {
    return fallback;
  }
  try {
    return node.as<std::string>();
  } catch (const YAML::Exception&) {
    fail(join_key(path, name), "expected a string");
  }
}

YAML::Node required(const YAML::Node& parent, const char* name, const std::string& path) {
  const YAML::Node node = parent[name];
  if (!node || node.IsNull()) {
    throw ConfigError("missing field: " + join_key(path, name));
  }
  return node;
}

Pose parse_pose(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"x", "y", "heading"});
  return make_pose(as_number(required(node, "x", path), join_key(path, "x")),
                   as_number(required(node, "y", path), join_key(path, "y")),
                   number_or(node, "heading", path, 0.0));
}

TrackSpec parse_track(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"preset", "board_size", "line_width", "start", "pieces"});
  TrackSpec spec;
  const std::string preset = string_or(node, "preset", path, "");
  if (preset == "reference") {
    spec = reference_track_spec();
  } else if (!preset.empty()) {
    fail(join_key(path, "preset"), "unknown preset '" + preset + "'");
  }
  spec.board_size = number_or(node, "board_size", path, spec.board_size);
  spec.line_width = number_or(node, "line_width", path, spec.line_width);
  if (node["start"]) {
    spec.start = parse_pose(node["start"], join_key(path, "start"));
  }
  if (node["pieces"]) {
    spec.pieces.clear();
    const YAML::Node pieces = node["pieces"];
    if (!pieces.IsSequence()) {
      fail(join_key(path, "pieces"), "expected a list");
    }
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const std::string p = join_key(path, "pieces[" + std::to_string(i) + "]");
      const YAML::Node piece = pieces[i];
      check_keys(piece, p, {"straight", "arc"});
      if (piece["straight"] && piece["arc"]) {
        fail(p, "give either straight or arc");
      }
      if (piece["straight"]) {
        spec.pieces.emplace_back(StraightPiece{as_number(piece["straight"], p + ".straight")});
      } else if (piece["arc"]) {
        const std::string ap = p + ".arc";
        check_keys(piece["arc"], ap, {"radius", "sweep"});
        spec.pieces.emplace_back(
            ArcPiece{as_number(required(piece["arc"], "radius", ap), ap + ".radius"),
                     as_number(required(piece["arc"], "sweep", ap), ap + ".sweep")});
      } else {
        fail(p, "expected straight or arc");
      }
    }
  } else if (preset.empty()) {
    throw ConfigError("missing field: " + join_key(path, "pieces"));
  }
  if (!node["start"] && preset.empty()) {
    throw ConfigError("missing field: " + join_key(path, "start"));
  }
  return spec;
}

VehicleParams parse_vehicle(const YAML::Node& node, const std::string& path) {
  check_keys(node, path,
             {"wheel_separation", "nominal_speed", "power_to_speed", "max_power", "nominal_power",
              "marker_offset", "body_half_length", "body_half_width", "motor_time_constant"});
  VehicleParams v;
  v.wheel_separation = number_or(node, "wheel_separation", path, v.wheel_separation);
  v.max_power = number_or(node, "max_power", path, v.max_power);
  v.nominal_power = number_or(node, "nominal_power", path, v.nominal_power);
  if (node["nominal_speed"] && node["power_to_speed"]) {
    fail(join_key(path, "nominal_speed"), "give nominal_speed or power_to_speed, not both");
  }
  const double speed = number_or(node, "nominal_speed", path, 0.25);
  v.power_to_speed = number_or(node, "power_to_speed", path, speed / v.nominal_power);
  v.marker_offset = number_or(node, "marker_offset", path, v.marker_offset);
  v.body_half_length = number_or(node, "body_half_length", path, v.body_half_length);
  v.body_half_width = number_or(node, "body_half_width", path, v.body_half_width);
  v.motor_time_constant =
      number_or(node, "motor_time_constant", path, v.motor_time_constant);
  return v;
}

CameraModel parse_camera(const YAML::Node& node, const std::string& path, CameraKind kind) {
  CameraModel cam = kind == CameraKind::onboard ? CameraModel::onboard_default()
                                                : CameraModel::infrastructure_default();
  if (!node) {
    return cam;
  }
  check_keys(node, path,
             {"image_width", "image_height", "pixels_per_meter", "crop_size", "lookahead",
              "origin", "coverage", "noise", "min_visible_fraction", "mount", "falloff"});
  cam.image_width = static_cast<int>(number_or(node, "image_width", path, cam.image_width));
  cam.image_height = static_cast<int>(number_or(node, "image_height", path, cam.image_height));
  cam.pixels_per_meter = number_or(node, "pixels_per_meter", path, cam.pixels_per_meter);
  cam.crop_size = number_or(node, "crop_size", path, cam.crop_size);
  cam.lookahead = number_or(node, "lookahead", path, cam.lookahead);
  cam.noise_px = number_or(node, "noise", path, cam.noise_px);
  cam.min_visible_fraction =
      number_or(node, "min_visible_fraction", path, cam.min_visible_fraction);
  if (node["origin"]) {
    const std::string op = join_key(path, "origin");
    check_keys(node["origin"], op, {"x", "y"});
    cam.origin = {number_or(node["origin"], "x", op, 0.0), number_or(node["origin"], "y", op, 0.0)};
  }
  cam.falloff = number_or(node, "falloff", path, cam.falloff);
  if (node["mount"]) {
    const std::string mp = join_key(path, "mount");
    check_keys(node["mount"], mp, {"x", "y"});
    cam.mount = Vec2{as_number(required(node["mount"], "x", mp), mp + ".x"),
                     as_number(required(node["mount"], "y", mp), mp + ".y")};
  }
  if (node["coverage"]) {
    const std::string cp = join_key(path, "coverage");
    const YAML::Node c = node["coverage"];
    check_keys(c, cp, {"x0", "y0", "x1", "y1"});
    cam.coverage = BoardRect{as_number(required(c, "x0", cp), cp + ".x0"),
                             as_number(required(c, "y0", cp), cp + ".y0"),
                             as_number(required(c, "x1", cp), cp + ".x1"),
                             as_number(required(c, "y1", cp), cp + ".y1")};
  }
  try {
    cam.validate();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return cam;
}

ChannelModel parse_channel(const YAML::Node& node, const std::string& path) {
  ChannelModel ch;
  if (!node) {
    return ch;
  }
  check_keys(node, path, {"loss", "delay"});
  ch.loss_probability = number_or(node, "loss", path, 0.0);
  if (const YAML::Node d = node["delay"]) {
    const std::string dp = join_key(path, "delay");
    if (d.IsSequence()) {
      if (d.size() != 2) {
        fail(dp, "expected a number or [min, max]");
      }
      ch.delay_min = as_number(d[0], dp);
      ch.delay_max = as_number(d[1], dp);
    } else {
      ch.delay_min = ch.delay_max = as_number(d, dp);
    }
  }
  try {
    ch.validate();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return ch;
}

OutageModel parse_outage(const YAML::Node& node, const std::string& path,
                         std::optional<double>& phase) {
  if (!node) {
    return NoOutage{};
  }
  check_keys(node, path, {"model", "period", "duration", "interval", "threshold", "phase"});
  const std::string model = string_or(node, "model", path, "none");
  if (node["phase"]) {
    phase = as_number(node["phase"], join_key(path, "phase"));
  }
  OutageModel out;
  if (model == "none") {
    out = NoOutage{};
  } else if (model == "periodic") {
    out = PeriodicOutage{number_or(node, "period", path, 3.0),
                         number_or(node, "duration", path, 0.0)};
  } else if (model == "probabilistic") {
    const double threshold = number_or(node, "threshold", path, 0.0);
    if (threshold != std::floor(threshold)) {
      fail(join_key(path, "threshold"), "must be an integer percent");
    }
    out = ProbabilisticOutage{number_or(node, "interval", path, 0.4), static_cast<int>(threshold)};
  } else {
    fail(join_key(path, "model"), "expected none, periodic or probabilistic");
  }
  try {
    validate(out);
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return out;
}

SensorConfig parse_sensor(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"kind", "rate", "latency", "gains", "camera", "channel", "outage"});
  const std::string kind_text =
      string_or(required(node, "kind", path).IsScalar() ? node : YAML::Node(), "kind", path, "");
  CameraKind kind;
  if (kind_text == "onboard") {
    kind = CameraKind::onboard;
  } else if (kind_text == "infrastructure") {
    kind = CameraKind::infrastructure;
  } else {
    fail(join_key(path, "kind"), "expected onboard or infrastructure");
  }

  SensorConfig s;
  s.camera = parse_camera(node["camera"], join_key(path, "camera"), kind);
  s.rate_hz = number_or(node, "rate", path, kind == CameraKind::onboard ? 11.0 : 30.0);
  s.latency = number_or(node, "latency", path, 0.0);
  s.gains = kind == CameraKind::onboard ? PidGains::onboard_default()
                                        : PidGains::infrastructure_default();
  if (const YAML::Node g = node["gains"]) {
    const std::string gp = join_key(path, "gains");
    check_keys(g, gp, {"kp", "ki", "kd", "decay"});
    s.gains.kp = number_or(g, "kp", gp, s.gains.kp);
    s.gains.ki = number_or(g, "ki", gp, s.gains.ki);
    s.gains.kd = number_or(g, "kd", gp, s.gains.kd);
    s.pid_decay = number_or(g, "decay", gp, s.pid_decay);
  }
  s.channel = parse_channel(node["channel"], join_key(path, "channel"));
  s.outage = parse_outage(node["outage"], join_key(path, "outage"), s.outage_phase);
  return s;
}

} // namespace

long long Scenario::ticks_per_second() const {
  return std::llround(1.0 / timestep);
}

std::size_t Scenario::infrastructure_count() const {
  return static_cast<std::size_t>(std::count_if(sensors.begin(), sensors.end(), [](const auto& s) {
    return s.kind() == CameraKind::infrastructure;
  }));
}

std::vector<int> Scenario::slot_of_sensors() const {
  std::vector<int> slots;
  int next_camera = 1;
  for (const auto& s : sensors) {
    slots.push_back(s.kind() == CameraKind::onboard ? 0 : next_camera++);
  }
  return slots;
}

void Scenario::validate() const {
  if (!(duration > 0.0)) {
    fail("duration", "must be positive");
  }
  if (!(timestep > 0.0)) {
    fail("timestep", "must be positive");
  }
  const double tps = 1.0 / timestep;
  const bool tick_aligned = std::abs(tps - std::round(tps)) <= 1e-6 * tps;
  if (sensors.empty()) {
    throw ConfigError("missing field: sensors");
  }
  int onboard = 0;
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const std::string key = "sensors[" + std::to_string(i) + "]";
    const auto& s = sensors[i];
    if (s.kind() == CameraKind::onboard && ++onboard > 1) {
      fail(key + ".kind", "at most one onboard sensor");
    }
    if (!(s.rate_hz > 0.0) || s.rate_hz > tps) {
      fail(key + ".rate", "must be positive and at most one frame per tick");
    }
    // The schedule of a sensor repeats every second only when a second is
    // a whole number of ticks; then every frame lands within one tick of
    // its nominal time.
    if (!tick_aligned) {
      fail(key + ".rate", "period " + std::to_string(1.0 / s.rate_hz) +
                              " s is not tick-aligned with timestep " +
                              std::to_string(timestep) + " s");
    }
    try {
      s.camera.validate();
      s.gains.validate();
      s.channel.validate();
      infrasteer::validate(s.outage);
    } catch (const std::exception& e) {
      fail(key, e.what());
    }
    if (!(s.latency >= 0.0)) {
      fail(key + ".latency", "must be non-negative");
    }
    if (!(s.pid_decay >= 0.0 && s.pid_decay < 1.0)) {
      fail(key + ".gains.decay", "must be in [0, 1)");
    }
  }
  if (!(crash_threshold > 0.0) || !(crash_hold >= 0.0)) {
    fail("crash", "threshold must be positive and hold non-negative");
  }
  if (command_ttl && !(*command_ttl > 0.0)) {
    fail("command_ttl", "must be positive");
  }
  if (post_outage_samples < 1) {
    fail("post_outage_samples", "must be at least 1");
  }
  try {
    vehicle.validate();
  } catch (const ConfigError& e) {
    fail("vehicle", e.what());
  }
  try {
    Track::from_spec(track);
  } catch (const TrackError& e) {
    fail("track", e.what());
  }
}

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  if (!root || root.IsNull()) {
    throw ConfigError("missing field: track");
  }
  check_keys(root, "",
             {"name", "duration", "timestep", "seed", "fusion", "track", "vehicle", "start",
              "crash", "command_ttl", "post_outage_samples", "udp", "sensors"});

  Scenario sc;
  sc.track = parse_track(required(root, "track", ""), "track");
  sc.name = string_or(root, "name", "", sc.name);
  sc.duration = number_or(root, "duration", "", sc.duration);
  sc.timestep = number_or(root, "timestep", "", sc.timestep);
  if (root["seed"]) {
    try {
      sc.seed = root["seed"].as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      fail("seed", "expected a non-negative integer");
    }
  }
  const std::string fusion = string_or(root, "fusion", "", to_string(sc.fusion));
  const auto policy = parse_fusion_policy(fusion);
  if (!policy) {
    fail("fusion", "unknown policy '" + fusion + "'");
  }
  sc.fusion = *policy;
  if (root["vehicle"]) {
    sc.vehicle = parse_vehicle(root["vehicle"], "vehicle");
  }
  if (root["start"]) {
    sc.start = parse_pose(root["start"], "start");
  }
  if (const YAML::Node crash = root["crash"]) {
    check_keys(crash, "crash", {"threshold", "hold"});
    sc.crash_threshold = number_or(crash, "threshold", "crash", sc.crash_threshold);
    sc.crash_hold = number_or(crash, "hold", "crash", sc.crash_hold);
  }
  if (root["command_ttl"]) {
    sc.command_ttl = as_number(root["command_ttl"], "command_ttl");
  }
  if (root["post_outage_samples"]) {
    const double k = as_number(root["post_outage_samples"], "post_outage_samples");
    if (k < 1 || k != std::floor(k)) {
      fail("post_outage_samples", "must be a positive integer");
    }
    sc.post_outage_samples = static_cast<std::size_t>(k);
  }
  if (const YAML::Node udp = root["udp"]) {
    check_keys(udp, "udp", {"host", "vehicle_port", "sensor_base_port"});
    sc.udp.host = string_or(udp, "host", "udp", sc.udp.host);
    sc.udp.vehicle_port = static_cast<int>(number_or(udp, "vehicle_port", "udp", sc.udp.vehicle_port));
    sc.udp.sensor_base_port =
        static_cast<int>(number_or(udp, "sensor_base_port", "udp", sc.udp.sensor_base_port));
  }

  const YAML::Node sensors = required(root, "sensors", "");
  if (!sensors.IsSequence()) {
    fail("sensors", "expected a list");
  }
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    sc.sensors.push_back(parse_sensor(sensors[i], "sensors[" + std::to_string(i) + "]"));
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read scenario file: " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario sc = parse_scenario(buf.str());
  if (sc.name == "unnamed") {
    sc.name = path.stem().string();
  }
  return sc;
}

std::filesystem::path shipped_scenario_dir() { return INFRASTEER_SCENARIO_DIR; }

Scenario load_shipped_scenario(const std::string& name) {
  return load_scenario(shipped_scenario_dir() / (name + ".cfg"));
}

} // namespace infrasteer
