#include "infrasteer/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "infrasteer/wire.hpp"

namespace infrasteer {

const char* to_string(FusionPolicy policy) {
  switch (policy) {
  case FusionPolicy::maximum_confidence:
    return "maximum_confidence";
  case FusionPolicy::simple_average:
    return "simple_average";
  case FusionPolicy::confidence_weighted:
    return "confidence_weighted";
  }
  return "?";
}

std::optional<FusionPolicy> parse_fusion_policy(std::string_view text) {
  if (text == "maximum_confidence" || text == "max") {
    return FusionPolicy::maximum_confidence;
  }
  if (text == "simple_average" || text == "simple") {
    return FusionPolicy::simple_average;
  }
  if (text == "confidence_weighted" || text == "weighted") {
    return FusionPolicy::confidence_weighted;
  }
  return std::nullopt;
}

SourceRegistry::SourceRegistry(std::vector<std::string> names) {
  for (auto& name : names) {
    SourceSlot slot;
    slot.name = std::move(name);
    slots_.push_back(std::move(slot));
  }
}

SourceRegistry SourceRegistry::standard(std::size_t infrastructure_count) {
  std::vector<std::string> names{"pi"};
  for (std::size_t i = 0; i < std::max<std::size_t>(2, infrastructure_count); ++i) {
    names.push_back("cam" + std::to_string(i));
  }
  return SourceRegistry(std::move(names));
}

bool SourceRegistry::ingest(int source_id, const SteeringCommand& raw, double now) {
  if (source_id < 0 || static_cast<std::size_t>(source_id) >= slots_.size()) {
    return false;
  }
  SteeringCommand scaled = raw;
  scaled.left = raw.left / kPowerScale;
  scaled.right = raw.right / kPowerScale;
  scaled.confidence = raw.confidence / kPowerScale;

  SourceSlot& slot = slots_[static_cast<std::size_t>(source_id)];
  slot.last_message = scaled;
  slot.received_at = now;
  slot.active = scaled.left > 0.0 || scaled.right > 0.0;
  slot.latest = slot.active ? scaled : SteeringCommand::zero_report();
  return true;
}

void SourceRegistry::expire(double now, double ttl) {
  for (auto& slot : slots_) {
    if (slot.active && now - slot.received_at > ttl) {
      slot.active = false;
      slot.latest = SteeringCommand::zero_report();
    }
  }
}

std::size_t SourceRegistry::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(slots_.begin(), slots_.end(), [](const SourceSlot& s) { return s.active; }));
}

std::optional<std::size_t> max_confidence_source(const SourceRegistry& registry) {
  const auto& slots = registry.slots();
  std::optional<std::size_t> chosen;
  double best = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    // >= lets the later of two tied sources win.
    if (!chosen || slots[i].latest.confidence >= best) {
      chosen = i;
      best = slots[i].latest.confidence;
    }
  }
  if (!chosen || !(best > 0.0)) {
    return std::nullopt;
  }
  return chosen;
}

std::optional<Powers> fuse_max(const SourceRegistry& registry) {
  const auto idx = max_confidence_source(registry);
  if (!idx) {
    return std::nullopt;
  }
  const auto& cmd = registry.slots()[*idx].latest;
  return Powers{cmd.left, cmd.right};
}

std::optional<Powers> fuse_simple_avg(const SourceRegistry& registry) {
  const std::size_t active = registry.active_count();
  if (active == 0) {
    return std::nullopt;
  }
  Powers sum;
  for (const auto& slot : registry.slots()) {
    sum.left += slot.latest.left;
    sum.right += slot.latest.right;
  }
  return Powers{sum.left / static_cast<double>(active), sum.right / static_cast<double>(active)};
}

std::optional<Powers> fuse_weighted(const SourceRegistry& registry) {
  double weight = 0.0;
  Powers sum;
  for (const auto& slot : registry.slots()) {
    weight += slot.latest.confidence;
    sum.left += slot.latest.confidence * slot.latest.left;
    sum.right += slot.latest.confidence * slot.latest.right;
  }
  if (!(weight > 0.0)) {
    return std::nullopt;
  }
  return Powers{sum.left / weight, sum.right / weight};
}

std::optional<Powers> fuse(const SourceRegistry& registry, FusionPolicy policy) {
  switch (policy) {
  case FusionPolicy::maximum_confidence:
    return fuse_max(registry);
  case FusionPolicy::simple_average:
    return fuse_simple_avg(registry);
  case FusionPolicy::confidence_weighted:
    return fuse_weighted(registry);
  }
  return std::nullopt;
}

VehicleNode::VehicleNode(SourceRegistry registry, FusionPolicy policy, double max_power,
                         std::optional<double> ttl)
    : registry_(std::move(registry)), policy_(policy), max_power_(max_power), ttl_(ttl) {}

bool VehicleNode::receive(int source_id, std::string_view datagram, double now) {
  SteeringCommand cmd;
  try {
    cmd = decode_command(datagram);
  } catch (const MalformedDatagram&) {
    ++malformed_;
    return false;
  }
  if (!registry_.ingest(source_id, cmd, now)) {
    ++unknown_;
    return false;
  }
  return true;
}

void VehicleNode::ingest(int source_id, const SteeringCommand& raw, double now) {
  if (!registry_.ingest(source_id, raw, now)) {
    ++unknown_;
  }
}

DriveTick VehicleNode::drive_tick(double now) {
  if (ttl_) {
    registry_.expire(now, *ttl_);
  }
  DriveTick tick;
  if (const auto fused = fuse(registry_, policy_)) {
    left_ = std::clamp(std::trunc(fused->left), 0.0, max_power_);
    right_ = std::clamp(std::trunc(fused->right), 0.0, max_power_);
  } else {
    tick.degenerate = true;
  }
  tick.left = left_;
  tick.right = right_;

  char time_buf[32];
  std::snprintf(time_buf, sizeof time_buf, "%.6f", now);
  std::string& row = tick.row;
  row = time_buf;
  row += ',' + format_number(left_) + ',' + format_number(right_);
  for (const auto& slot : registry_.slots()) {
    const auto& m = slot.last_message;
    for (double v : {m.left, m.right, m.confidence, m.p, m.i, m.d}) {
      row += ',';
      row += format_number(v);
    }
  }
  if (tick.degenerate) {
    row += ",-1";
  }
  return tick;
}

std::string VehicleNode::csv_header() const {
  std::string header = "time,left,right";
  for (const auto& slot : registry_.slots()) {
    for (const char* field : {"Left", "Right", "Conf", "P", "I", "D"}) {
      header += ',' + slot.name + field;
    }
  }
  return header;
}

} // namespace infrasteer
