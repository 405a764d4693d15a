#include "infrasteer/wire.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace infrasteer {

namespace {

// Poll times are tick multiples; delivery times are sums of doubles.
constexpr double kDueSlack = 1e-9;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' ||
                        s.front() == '\n')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_field(std::string_view field, std::size_t index) {
  field = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() ||
      !std::isfinite(value)) {
    throw MalformedDatagram("field " + std::to_string(index) + " is not a number: '" +
                            std::string(field) + "'");
  }
  return value;
}

} // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

std::string encode_command(const SteeringCommand& cmd) {
  std::string out;
  out.reserve(64);
  const double fields[6] = {cmd.left, cmd.right, cmd.confidence, cmd.p, cmd.i, cmd.d};
  for (int k = 0; k < 6; ++k) {
    if (k > 0) {
      out += ';';
    }
    out += format_number(fields[k]);
  }
  return out;
}

SteeringCommand decode_command(std::string_view text) {
  double fields[6];
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t sep = text.find(';', start);
    const std::string_view field =
        text.substr(start, sep == std::string_view::npos ? std::string_view::npos : sep - start);
    if (count == 6) {
      throw MalformedDatagram("expected 6 fields, got more");
    }
    fields[count] = parse_field(field, count);
    ++count;
    if (sep == std::string_view::npos) {
      break;
    }
    start = sep + 1;
  }
  if (count != 6) {
    throw MalformedDatagram("expected 6 fields, got " + std::to_string(count));
  }
  return {fields[0], fields[1], fields[2], fields[3], fields[4], fields[5]};
}

void ChannelModel::validate() const {
  if (!(loss_probability >= 0.0 && loss_probability <= 1.0)) {
    throw std::invalid_argument("loss_probability must be in [0, 1]");
  }
  if (!(delay_min >= 0.0) || !(delay_max >= delay_min) || !std::isfinite(delay_max)) {
    throw std::invalid_argument("delay must satisfy 0 <= delay_min <= delay_max");
  }
}

SimChannel::SimChannel(ChannelModel model) : model_(model), rng_(model.seed) {
  model_.validate();
}

void SimChannel::send(int source_id, std::string datagram, double now) {
  const bool dropped = rng_.uniform() < model_.loss_probability;
  double delay = model_.delay_min;
  if (model_.delay_max > model_.delay_min) {
    delay = rng_.uniform(model_.delay_min, model_.delay_max);
  }
  if (dropped) {
    return;
  }
  double due = now + delay;
  auto last = last_delivery_.find(source_id);
  if (last != last_delivery_.end()) {
    due = std::max(due, last->second);
  }
  last_delivery_[source_id] = due;
  const std::uint64_t seq = sequence_++;
  pending_.emplace(std::make_pair(due, seq), Delivery{source_id, std::move(datagram), now, due});
}

std::vector<Delivery> SimChannel::poll(double now) {
  std::vector<Delivery> out;
  auto it = pending_.begin();
  while (it != pending_.end() && it->first.first <= now + kDueSlack) {
    out.push_back(std::move(it->second));
    it = pending_.erase(it);
  }
  return out;
}

SimTransport::SimTransport(std::vector<ChannelModel> per_source) {
  channels_.reserve(per_source.size());
  for (const auto& model : per_source) {
    channels_.emplace_back(model);
  }
}

void SimTransport::send(int source_id, const std::string& datagram, double now) {
  if (source_id < 0 || static_cast<std::size_t>(source_id) >= channels_.size()) {
    throw std::out_of_range("no channel for source " + std::to_string(source_id));
  }
  channels_[static_cast<std::size_t>(source_id)].send(source_id, datagram, now);
}

std::vector<Delivery> SimTransport::poll(double now) {
  std::vector<Delivery> out;
  for (auto& channel : channels_) {
    auto batch = channel.poll(now);
    std::move(batch.begin(), batch.end(), std::back_inserter(out));
  }
  std::stable_sort(out.begin(), out.end(), [](const Delivery& a, const Delivery& b) {
    if (a.delivered_at != b.delivered_at) {
      return a.delivered_at < b.delivered_at;
    }
    if (a.sent_at != b.sent_at) {
      return a.sent_at < b.sent_at;
    }
    return a.source_id < b.source_id;
  });
  return out;
}

} // namespace infrasteer
