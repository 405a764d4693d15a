#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "infrasteer/wire.hpp"

namespace infrasteer {

namespace {

constexpr std::size_t kMaxDatagram = 1500;

int open_bound_socket(int port) {
  const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd < 0) {
    throw UdpError(std::string("socket: ") + std::strerror(errno));
  }
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    throw UdpError("bind port " + std::to_string(port) + ": " + err);
  }
  return fd;
}

} // namespace

UdpSender::UdpSender(int sensor_id, const UdpConfig& config)
    : fd_(open_bound_socket(config.sensor_base_port + sensor_id)),
      host_(config.host),
      port_(config.vehicle_port) {}

UdpSender::~UdpSender() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

void UdpSender::send(const std::string& datagram) {
  sockaddr_in dest{};
  dest.sin_family = AF_INET;
  dest.sin_port = htons(static_cast<std::uint16_t>(port_));
  if (::inet_pton(AF_INET, host_.c_str(), &dest.sin_addr) != 1) {
    throw UdpError("bad vehicle address: " + host_);
  }
  // A failed send is a lost datagram, as on the real link.
  ::sendto(fd_, datagram.data(), datagram.size(), 0, reinterpret_cast<sockaddr*>(&dest),
           sizeof dest);
}

UdpReceiver::UdpReceiver(const UdpConfig& config)
    : fd_(open_bound_socket(config.vehicle_port)),
      sensor_base_port_(config.sensor_base_port),
      worker_([this] { loop(); }) {}

UdpReceiver::~UdpReceiver() {
  stop_ = true;
  if (worker_.joinable()) {
    worker_.join();
  }
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

void UdpReceiver::loop() {
  char buf[kMaxDatagram];
  while (!stop_) {
    pollfd pfd{fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 20) <= 0) {
      continue;
    }
    sockaddr_in from{};
    socklen_t from_len = sizeof from;
    const ssize_t n = ::recvfrom(fd_, buf, sizeof buf, 0, reinterpret_cast<sockaddr*>(&from),
                                 &from_len);
    if (n < 0) {
      continue;
    }
    const int port = ntohs(from.sin_port);
    const int source = port >= sensor_base_port_ ? port - sensor_base_port_ : -1;
    std::lock_guard lock(mutex_);
    queue_.emplace_back(source, std::string(buf, static_cast<std::size_t>(n)));
  }
}

std::vector<std::pair<int, std::string>> UdpReceiver::drain() {
  std::lock_guard lock(mutex_);
  std::vector<std::pair<int, std::string>> out(std::make_move_iterator(queue_.begin()),
                                               std::make_move_iterator(queue_.end()));
  queue_.clear();
  return out;
}

UdpTransport::UdpTransport(int sensor_count, const UdpConfig& config) : receiver_(config) {
  for (int i = 0; i < sensor_count; ++i) {
    senders_.push_back(std::make_unique<UdpSender>(i, config));
  }
}

void UdpTransport::send(int source_id, const std::string& datagram, double /*now*/) {
  senders_.at(static_cast<std::size_t>(source_id))->send(datagram);
}

std::vector<Delivery> UdpTransport::poll(double now) {
  std::vector<Delivery> out;
  for (auto& [source, text] : receiver_.drain()) {
    out.push_back({source, std::move(text), now, now});
  }
  return out;
}

} // namespace infrasteer
