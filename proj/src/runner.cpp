#include "infrasteer/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <deque>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "infrasteer/control.hpp"
#include "infrasteer/faults.hpp"
#include "infrasteer/fusion.hpp"
#include "infrasteer/perception.hpp"
#include "infrasteer/rng.hpp"
#include "infrasteer/wire.hpp"

namespace infrasteer {

namespace {

constexpr double kTickSlack = 1e-9;

struct SensorRuntime {
  const SensorConfig* config = nullptr;
  int slot = 0;
  Rng noise;
  PidState pid;
  OutageSchedule outage;
  double phase = 0.0;
  long long frame = 0;
  double next_frame = 0.0;
  // Processed frames waiting for their send time.
  std::deque<std::pair<double, std::string>> outbox;
};

nlohmann::json summary_to_json(const std::optional<RunSummary>& s) {
  if (!s) {
    return nullptr;
  }
  return {{"mean_abs", s->mean_abs}, {"std_abs", s->std_abs}, {"count", s->count},
          {"sem", s->sem}};
}

std::optional<RunSummary> summarize_if_any(const SampleSeries& series) {
  if (series.empty()) {
    return std::nullopt;
  }
  return summarize(series);
}

std::string series_csv(const char* name, const SampleSeries& series) {
  std::string out = std::string("time,") + name + "\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += format_number(series.times()[i]) + "," + format_number(series.values()[i]) + "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

std::unique_ptr<Transport> make_transport(const Scenario& sc, const std::vector<int>& slots,
                                          const RunOptions& options) {
  if (options.transport == TransportKind::udp) {
    return std::make_unique<UdpTransport>(static_cast<int>(sc.sensors.size()), sc.udp);
  }
  std::vector<ChannelModel> channels;
  for (std::size_t i = 0; i < sc.sensors.size(); ++i) {
    ChannelModel ch = sc.sensors[i].channel;
    ch.seed = mix_seed(sc.seed, 100 + static_cast<std::uint64_t>(slots[i]));
    channels.push_back(ch);
  }
  return std::make_unique<SimTransport>(std::move(channels));
}

} // namespace

std::optional<TransportKind> parse_transport_kind(const std::string& text) {
  if (text == "sim") {
    return TransportKind::sim;
  }
  if (text == "udp") {
    return TransportKind::udp;
  }
  return std::nullopt;
}

RunResult run(const Scenario& sc, const RunOptions& options) {
  sc.validate();
  const Track track = Track::from_spec(sc.track);
  const std::vector<int> slots = sc.slot_of_sensors();
  const long long tps = sc.ticks_per_second();
  const double dt = 1.0 / static_cast<double>(tps);
  const long long total_ticks = std::llround(sc.duration * static_cast<double>(tps));

  std::vector<SensorRuntime> sensors;
  sensors.reserve(sc.sensors.size());
  for (std::size_t i = 0; i < sc.sensors.size(); ++i) {
    const SensorConfig& cfg = sc.sensors[i];
    const auto slot = static_cast<std::uint64_t>(slots[i]);
    Rng phase_rng(mix_seed(sc.seed, 300 + slot));
    const double period = 1.0 / cfg.rate_hz;
    double outage_phase = 0.0;
    if (const auto* p = std::get_if<PeriodicOutage>(&cfg.outage)) {
      outage_phase = phase_rng.uniform(0.0, p->period);
    } else if (const auto* q = std::get_if<ProbabilisticOutage>(&cfg.outage)) {
      outage_phase = phase_rng.uniform(0.0, q->interval);
    }
    if (cfg.outage_phase) {
      outage_phase = *cfg.outage_phase;
    }
    const double frame_phase = phase_rng.uniform(0.0, period);
    PidState pid;
    pid.decay = cfg.pid_decay;
    sensors.push_back(SensorRuntime{&cfg, slots[i], Rng(mix_seed(sc.seed, 200 + slot)), pid,
                                    OutageSchedule(cfg.outage, outage_phase,
                                                   mix_seed(sc.seed, 400 + slot)),
                                    frame_phase, 0, frame_phase, {}});
  }

  auto transport = make_transport(sc, slots, options);
  VehicleNode vehicle(SourceRegistry::standard(sc.infrastructure_count()), sc.fusion,
                      sc.vehicle.max_power, sc.command_ttl);

  RunResult result;
  result.scenario_name = sc.name;
  result.seed = sc.seed;
  result.duration = sc.duration;
  for (const auto& slot : vehicle.registry().slots()) {
    result.errors.push_back(SourceError{slot.name, {}, std::nullopt});
  }

  std::string log = vehicle.csv_header() + "\n";
  Pose pose = sc.start.value_or(track.start_pose());
  CrashDetector crash(sc.crash_threshold, sc.crash_hold);
  WheelPowers wheels;

  const auto wall_start = std::chrono::steady_clock::now();
  long long tick = 0;
  double now = 0.0;
  for (; tick < total_ticks; ++tick) {
    now = static_cast<double>(tick) * dt;
    if (options.transport == TransportKind::udp) {
      const auto due = wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                        std::chrono::duration<double>(now / options.time_scale));
      std::this_thread::sleep_until(due);
    }

    for (std::size_t i = 0; i < sensors.size(); ++i) {
      SensorRuntime& s = sensors[i];
      if (s.next_frame > now + kTickSlack) {
        continue;
      }
      // At most one frame per tick; a late frame never bunches up.
      while (s.next_frame <= now + kTickSlack) {
        ++s.frame;
        s.next_frame = s.phase + static_cast<double>(s.frame) / s.config->rate_hz;
      }
      const Observation obs = observe(s.config->camera, track, pose, sc.vehicle, &s.noise);
      const SensorReading reading = read_sensor(s.config->camera, obs);
      const SensorTick out = sensor_tick(reading, s.pid, s.config->gains);
      s.pid = out.state;
      const SteeringCommand cmd = gate(out.command, outage_active(s.outage, now));
      s.outbox.emplace_back(now + s.config->latency, encode_command(cmd));
    }
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      auto& outbox = sensors[i].outbox;
      while (!outbox.empty() && outbox.front().first <= now + kTickSlack) {
        transport->send(static_cast<int>(i), outbox.front().second, now);
        outbox.pop_front();
        ++result.datagrams_sent;
      }
    }

    bool delivered_active = false;
    for (const Delivery& d : transport->poll(now)) {
      const int slot = d.source_id >= 0 && static_cast<std::size_t>(d.source_id) < sensors.size()
                           ? sensors[static_cast<std::size_t>(d.source_id)].slot
                           : -1;
      if (!vehicle.receive(slot, d.datagram, now)) {
        ++result.datagrams_rejected;
        continue;
      }
      ++result.datagrams_delivered;
      const SourceSlot& src = vehicle.registry().slots()[static_cast<std::size_t>(slot)];
      if (src.active) {
        delivered_active = true;
        result.errors[static_cast<std::size_t>(slot)].reported.push(now, src.latest.p);
      }
      const DriveTick drive = vehicle.drive_tick(now);
      if (drive.degenerate) {
        ++result.degenerate_ticks;
      }
      log += drive.row;
      log += '\n';
    }

    const double deviation = lateral_deviation(track, pose);
    if (delivered_active) {
      result.correction.push(now, correction_metric(vehicle.left(), vehicle.right()));
      result.deviation.push(now, deviation);
    }
    if (const auto t = crash.update(now, deviation)) {
      result.crash_time = *t;
      break;
    }
    wheels = motor_response(wheels, vehicle.left(), vehicle.right(), dt, sc.vehicle);
    pose = step_vehicle(pose, wheels.left, wheels.right, dt, sc.vehicle);
  }
  result.end_time = result.crash_time ? now : static_cast<double>(total_ticks) * dt;
  result.log_csv = std::move(log);

  for (const auto& s : sensors) {
    const auto ends = s.outage.end_times(0.0, result.end_time);
    result.outage_ends.insert(result.outage_ends.end(), ends.begin(), ends.end());
  }
  std::sort(result.outage_ends.begin(), result.outage_ends.end());
  result.outage_ends.erase(std::unique(result.outage_ends.begin(), result.outage_ends.end()),
                           result.outage_ends.end());

  if (!result.deviation.empty()) {
    result.deviation_summary = summarize(result.deviation);
    result.correction_summary = summarize(result.correction);
  }
  result.deviation_summary.crash_time = result.crash_time;
  result.correction_summary.crash_time = result.crash_time;
  if (!result.outage_ends.empty()) {
    const std::size_t k = sc.post_outage_samples;
    result.post_outage_deviation =
        summarize_if_any(post_outage_window(result.deviation, result.outage_ends, k));
    result.post_outage_correction =
        summarize_if_any(post_outage_window(result.correction, result.outage_ends, k));
  }
  for (auto& e : result.errors) {
    e.summary = summarize_if_any(e.reported);
  }
  return result;
}

std::string RunResult::summary_json() const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario_name;
  j["seed"] = seed;
  j["duration"] = duration;
  j["end_time"] = end_time;
  j["completed"] = !crashed();
  j["crash_time"] = crash_time ? nlohmann::ordered_json(*crash_time) : nullptr;
  j["deviation"] = summary_to_json(deviation.empty() ? std::nullopt
                                                     : std::optional(deviation_summary));
  j["correction"] = summary_to_json(correction.empty() ? std::nullopt
                                                       : std::optional(correction_summary));
  j["post_outage_deviation"] = summary_to_json(post_outage_deviation);
  j["post_outage_correction"] = summary_to_json(post_outage_correction);
  nlohmann::ordered_json err = nlohmann::ordered_json::object();
  for (const auto& e : errors) {
    err[e.slot] = summary_to_json(e.summary);
  }
  j["reported_error"] = err;
  j["datagrams"] = {{"sent", datagrams_sent},
                    {"delivered", datagrams_delivered},
                    {"rejected", datagrams_rejected}};
  j["degenerate_ticks"] = degenerate_ticks;
  return j.dump(2) + "\n";
}

void write_artifacts(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "drive_log.csv", result.log_csv);
  write_text(dir / "deviation.csv", series_csv("deviation", result.deviation));
  write_text(dir / "correction.csv", series_csv("correction", result.correction));
  for (const auto& e : result.errors) {
    if (!e.reported.empty()) {
      write_text(dir / ("error_" + e.slot + ".csv"), series_csv("error", e.reported));
    }
  }
  std::string ends = "outage_end\n";
  for (double t : result.outage_ends) {
    ends += format_number(t) + "\n";
  }
  write_text(dir / "outage_ends.csv", ends);
  write_text(dir / "summary.json", result.summary_json());
}

std::string summarize_run_dir(const std::filesystem::path& dir) {
  std::ifstream in(dir / "summary.json");
  if (!in) {
    throw std::runtime_error("no summary.json in " + dir.string());
  }
  const auto j = nlohmann::json::parse(in);
  std::ostringstream out;
  out << "scenario " << j.at("scenario").get<std::string>() << " seed "
      << j.at("seed").get<std::uint64_t>() << "\n";
  if (j.at("completed").get<bool>()) {
    out << "completed " << j.at("end_time").get<double>() << " s\n";
  } else {
    out << "crashed at " << j.at("crash_time").get<double>() << " s\n";
  }
  const auto line = [&](const char* label, const nlohmann::json& s) {
    if (s.is_null()) {
      return;
    }
    out << label << ": mean|x| " << s.at("mean_abs").get<double>() << "  std "
        << s.at("std_abs").get<double>() << "  n " << s.at("count").get<std::size_t>() << "\n";
  };
  line("deviation [m]", j.at("deviation"));
  line("correction", j.at("correction"));
  line("post-outage deviation [m]", j.at("post_outage_deviation"));
  line("post-outage correction", j.at("post_outage_correction"));
  for (const auto& [slot, s] : j.at("reported_error").items()) {
    line(("error " + slot).c_str(), s);
  }
  return out.str();
}

} // namespace infrasteer
