#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "infrasteer/control.hpp"
#include "infrasteer/faults.hpp"
#include "infrasteer/fusion.hpp"
#include "infrasteer/perception.hpp"
#include "infrasteer/wire.hpp"
#include "infrasteer/world.hpp"

namespace infrasteer {

struct SensorConfig {
  CameraModel camera;
  double rate_hz = 11.0;
  PidGains gains;
  double pid_decay = 0.9;
  // Capture-to-send processing time of one frame.
  double latency = 0.0;
  ChannelModel channel;
  OutageModel outage = NoOutage{};
  // Fixed outage phase; drawn from the scenario seed when absent.
  std::optional<double> outage_phase;

  CameraKind kind() const { return camera.kind; }
};

struct Scenario {
  std::string name = "unnamed";
  TrackSpec track;
  VehicleParams vehicle;
  // Defaults to the start of the track.
  std::optional<Pose> start;
  std::vector<SensorConfig> sensors;
  FusionPolicy fusion = FusionPolicy::confidence_weighted;
  double duration = 100.0;
  double timestep = 0.005;
  std::uint64_t seed = 1;
  double crash_threshold = 0.25;
  double crash_hold = 0.5;
  // Off unless set: a source's command stays valid until replaced.
  std::optional<double> command_ttl;
  std::size_t post_outage_samples = 5;
  UdpConfig udp;

  // Throws ConfigError naming the offending key.
  void validate() const;

  // Registry slot of each sensor: the onboard camera takes "pi", the
  // infrastructure cameras take cam0, cam1, ... in listed order.
  std::vector<int> slot_of_sensors() const;
  std::size_t infrastructure_count() const;
  long long ticks_per_second() const;
};

// Hierarchical YAML text. Unknown keys are rejected; errors name the key.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

// Directory of the scenario files that ship with the project.
std::filesystem::path shipped_scenario_dir();
Scenario load_shipped_scenario(const std::string& name);

} // namespace infrasteer
