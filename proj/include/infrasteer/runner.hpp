#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "infrasteer/metrics.hpp"
#include "infrasteer/scenario.hpp"

namespace infrasteer {

enum class TransportKind { sim, udp };

std::optional<TransportKind> parse_transport_kind(const std::string& text);

struct RunOptions {
  TransportKind transport = TransportKind::sim;
  // UDP mode only: simulated seconds per wall-clock second.
  double time_scale = 1.0;
};

struct SourceError {
  std::string slot;
  SampleSeries reported;
  std::optional<RunSummary> summary;
};

struct RunResult {
  std::string scenario_name;
  std::uint64_t seed = 0;
  double duration = 0.0;
  double end_time = 0.0;
  std::optional<double> crash_time;

  std::string log_csv;
  // One sample per tick that ingested at least one active command.
  SampleSeries deviation;
  SampleSeries correction;
  std::vector<SourceError> errors;
  std::vector<double> outage_ends;

  RunSummary deviation_summary;
  RunSummary correction_summary;
  std::optional<RunSummary> post_outage_deviation;
  std::optional<RunSummary> post_outage_correction;

  std::size_t datagrams_sent = 0;
  std::size_t datagrams_delivered = 0;
  std::size_t datagrams_rejected = 0;
  std::size_t degenerate_ticks = 0;

  bool crashed() const { return crash_time.has_value(); }
  std::string summary_json() const;
};

// Simulated runs are a pure function of the scenario (seed included).
RunResult run(const Scenario& scenario, const RunOptions& options = {});

// drive_log.csv, deviation.csv, correction.csv, error_<slot>.csv,
// outage_ends.csv and summary.json.
void write_artifacts(const RunResult& result, const std::filesystem::path& dir);

// Human-readable digest of a directory written by write_artifacts.
std::string summarize_run_dir(const std::filesystem::path& dir);

} // namespace infrasteer
