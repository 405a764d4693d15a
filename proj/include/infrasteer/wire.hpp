#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "infrasteer/command.hpp"
#include "infrasteer/rng.hpp"

namespace infrasteer {

// Wire form: "left;right;confidence;P;I;D", shortest round-trip decimals.
std::string encode_command(const SteeringCommand& cmd);

class MalformedDatagram : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Throws MalformedDatagram on a wrong field count or a non-numeric field.
SteeringCommand decode_command(std::string_view text);

// Shortest decimal that parses back to the same double.
std::string format_number(double value);

struct ChannelModel {
  double loss_probability = 0.0;
  // Delay is drawn uniformly from [delay_min, delay_max].
  double delay_min = 0.0;
  double delay_max = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Delivery {
  int source_id = 0;
  std::string datagram;
  double sent_at = 0.0;
  double delivered_at = 0.0;
};

// Lossy, delaying link shared by any number of sources. Each datagram is
// dropped independently; survivors keep FIFO order per source.
class SimChannel {
public:
  explicit SimChannel(ChannelModel model);

  void send(int source_id, std::string datagram, double now);
  // Everything due at or before `now`, by delivery time then send order.
  std::vector<Delivery> poll(double now);

  std::size_t in_flight() const { return pending_.size(); }

private:
  ChannelModel model_;
  Rng rng_;
  std::uint64_t sequence_ = 0;
  std::map<std::pair<double, std::uint64_t>, Delivery> pending_;
  std::map<int, double> last_delivery_;
};

// How sensor datagrams reach the vehicle node.
class Transport {
public:
  virtual ~Transport() = default;
  virtual void send(int source_id, const std::string& datagram, double now) = 0;
  virtual std::vector<Delivery> poll(double now) = 0;
};

// One simulated channel per source.
class SimTransport final : public Transport {
public:
  explicit SimTransport(std::vector<ChannelModel> per_source);

  void send(int source_id, const std::string& datagram, double now) override;
  std::vector<Delivery> poll(double now) override;

private:
  std::vector<SimChannel> channels_;
};

struct UdpConfig {
  std::string host = "127.0.0.1";
  int vehicle_port = 5000;
  // Sensor i sends from port sensor_base_port + i.
  int sensor_base_port = 4000;
};

class UdpError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UdpSender {
public:
  UdpSender(int sensor_id, const UdpConfig& config);
  ~UdpSender();
  UdpSender(const UdpSender&) = delete;
  UdpSender& operator=(const UdpSender&) = delete;

  void send(const std::string& datagram);

private:
  int fd_ = -1;
  std::string host_;
  int port_ = 0;
};

// Vehicle-side socket. A background thread receives datagrams and queues
// them; the owner drains the queue from its own context.
class UdpReceiver {
public:
  explicit UdpReceiver(const UdpConfig& config);
  ~UdpReceiver();
  UdpReceiver(const UdpReceiver&) = delete;
  UdpReceiver& operator=(const UdpReceiver&) = delete;

  // Source ids come from the sender's port; unknown ports map to -1.
  std::vector<std::pair<int, std::string>> drain();

private:
  void loop();

  int fd_ = -1;
  int sensor_base_port_ = 0;
  std::atomic<bool> stop_{false};
  std::mutex mutex_;
  std::deque<std::pair<int, std::string>> queue_;
  std::thread worker_;
};

class UdpTransport final : public Transport {
public:
  UdpTransport(int sensor_count, const UdpConfig& config);

  void send(int source_id, const std::string& datagram, double now) override;
  std::vector<Delivery> poll(double now) override;

private:
  std::vector<std::unique_ptr<UdpSender>> senders_;
  UdpReceiver receiver_;
};

} // namespace infrasteer
