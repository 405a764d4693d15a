#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infrasteer/command.hpp"

namespace infrasteer {

enum class FusionPolicy { maximum_confidence, simple_average, confidence_weighted };

const char* to_string(FusionPolicy policy);
// Accepts the enum names plus the short forms "max", "simple", "weighted".
std::optional<FusionPolicy> parse_fusion_policy(std::string_view text);

struct SourceSlot {
  std::string name;
  // Scaled command used for fusion; all zero while inactive.
  SteeringCommand latest;
  // Last scaled message as received, zero-reports included (for the log).
  SteeringCommand last_message;
  bool active = false;
  double received_at = 0.0;
};

// Latest command per source. Slot order is fixed and decides ties.
class SourceRegistry {
public:
  explicit SourceRegistry(std::vector<std::string> names);

  // Slots "pi", "cam0", "cam1", ...; at least two camera slots so the log
  // layout stays fixed.
  static SourceRegistry standard(std::size_t infrastructure_count);

  // Divides left, right and confidence by 3. Returns false (and changes
  // nothing) for an unknown source.
  bool ingest(int source_id, const SteeringCommand& raw, double now = 0.0);

  // Deactivates sources whose latest report is older than `ttl` seconds.
  void expire(double now, double ttl);

  const std::vector<SourceSlot>& slots() const { return slots_; }
  std::size_t size() const { return slots_.size(); }
  std::size_t active_count() const;

private:
  std::vector<SourceSlot> slots_;
};

constexpr double kPowerScale = 3.0;

struct Powers {
  double left = 0.0;
  double right = 0.0;
};

// Each returns nothing in the degenerate case (no active source, or zero
// total confidence).
std::optional<std::size_t> max_confidence_source(const SourceRegistry& registry);
std::optional<Powers> fuse_max(const SourceRegistry& registry);
std::optional<Powers> fuse_simple_avg(const SourceRegistry& registry);
std::optional<Powers> fuse_weighted(const SourceRegistry& registry);
std::optional<Powers> fuse(const SourceRegistry& registry, FusionPolicy policy);

struct DriveTick {
  double left = 0.0;
  double right = 0.0;
  bool degenerate = false;
  std::string row;
};

// The vehicle-control node: decodes datagrams into the registry and fuses
// after every one of them.
class VehicleNode {
public:
  VehicleNode(SourceRegistry registry, FusionPolicy policy, double max_power = 255.0,
              std::optional<double> ttl = std::nullopt);

  // False when the datagram is malformed or from an unknown source; the
  // datagram is then dropped and counted.
  bool receive(int source_id, std::string_view datagram, double now);
  void ingest(int source_id, const SteeringCommand& raw, double now);

  // Fuse, truncate, clamp, and log. Degenerate fusion holds the previous
  // powers and marks the row with a trailing -1.
  DriveTick drive_tick(double now);

  double left() const { return left_; }
  double right() const { return right_; }
  const SourceRegistry& registry() const { return registry_; }
  std::size_t malformed() const { return malformed_; }
  std::size_t unknown() const { return unknown_; }

  std::string csv_header() const;

private:
  SourceRegistry registry_;
  FusionPolicy policy_;
  double max_power_;
  std::optional<double> ttl_;
  double left_ = 0.0;
  double right_ = 0.0;
  std::size_t malformed_ = 0;
  std::size_t unknown_ = 0;
};

} // namespace infrasteer
