#include "agectl/udp_runner.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>

#include "agectl/wire.hpp"

namespace agectl {

namespace {

struct AddrParts {
  std::string host;
  std::string port;
};

AddrParts split_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon + 1 >= addr.size())
    throw std::invalid_argument("address must be HOST:PORT, got '" + addr + "'");
  return {addr.substr(0, colon), addr.substr(colon + 1)};
}

int open_udp(const AddrParts& parts, bool bind_socket, sockaddr_storage* peer,
             socklen_t* peer_len) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_DGRAM;
  if (bind_socket) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(parts.host.empty() ? nullptr : parts.host.c_str(),
                               parts.port.c_str(), &hints, &res);
  if (rc != 0)
    throw std::runtime_error("getaddrinfo(" + parts.host + ":" + parts.port +
                             "): " + gai_strerror(rc));
  int fd = -1;
  std::string err = "no usable address";
  for (addrinfo* p = res; p; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) {
      err = std::strerror(errno);
      continue;
    }
    if (bind_socket) {
      if (::bind(fd, p->ai_addr, p->ai_addrlen) == 0) break;
      err = std::strerror(errno);
    } else {
      if (peer && peer_len) {
        std::memcpy(peer, p->ai_addr, p->ai_addrlen);
        *peer_len = p->ai_addrlen;
      }
      break;
    }
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0)
    throw std::runtime_error("cannot open socket for " + parts.host + ":" + parts.port +
                             ": " + err);
  return fd;
}

class MonotonicClock {
 public:
  MonotonicClock() : start_(std::chrono::steady_clock::now()) {}
  Timestamp now() const {
    const auto d = std::chrono::steady_clock::now() - start_;
    return Timestamp{std::chrono::duration_cast<std::chrono::nanoseconds>(d).count()};
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

EchoServer::EchoServer(const std::string& addr) {
  const auto parts = split_addr(addr);
  fd_ = open_udp(parts, true, nullptr, nullptr);
  sockaddr_storage local{};
  socklen_t len = sizeof(local);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&local), &len) != 0) {
    ::close(fd_);
    throw std::runtime_error(std::string("getsockname: ") + std::strerror(errno));
  }
  if (local.ss_family == AF_INET)
    port_ = ntohs(reinterpret_cast<sockaddr_in*>(&local)->sin_port);
  else if (local.ss_family == AF_INET6)
    port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&local)->sin6_port);
}

EchoServer::~EchoServer() {
  if (fd_ >= 0) ::close(fd_);
}

void EchoServer::run(const std::atomic<bool>* stop) {
  std::array<std::uint8_t, 2048> buf;
  pollfd pfd{fd_, POLLIN, 0};
  while (!stop || !stop->load(std::memory_order_relaxed)) {
    const int rc = ::poll(&pfd, 1, 100);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(std::string("poll: ") + std::strerror(errno));
    }
    if (rc == 0) continue;
    sockaddr_storage peer{};
    socklen_t peer_len = sizeof(peer);
    const ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0,
                                 reinterpret_cast<sockaddr*>(&peer), &peer_len);
    if (n < 0) {
      if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR || errno == ECONNREFUSED)
        continue;
      throw std::runtime_error(std::string("recvfrom: ") + std::strerror(errno));
    }
    received_.fetch_add(1, std::memory_order_relaxed);
    if (!WirePacket::decode(buf.data(), static_cast<std::size_t>(n))) {
      dropped_.fetch_add(1, std::memory_order_relaxed);
      continue;
    }
    if (::sendto(fd_, buf.data(), static_cast<std::size_t>(n), 0,
                 reinterpret_cast<sockaddr*>(&peer), peer_len) ==
        static_cast<ssize_t>(n))
      echoed_.fetch_add(1, std::memory_order_relaxed);
  }
}

SenderResult run_sender(const SenderOptions& opts) {
  SenderResult out;
  if (opts.packets == 0) return out;

  const auto parts = split_addr(opts.peer);
  sockaddr_storage peer{};
  socklen_t peer_len = 0;
  const int fd = open_udp(parts, false, &peer, &peer_len);
  struct FdGuard {
    int fd;
    ~FdGuard() { ::close(fd); }
  } guard{fd};
  if (::connect(fd, reinterpret_cast<sockaddr*>(&peer), peer_len) != 0)
    throw std::runtime_error(std::string("connect: ") + std::strerror(errno));
  const int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);

  MonotonicClock clock;
  PolicySession session(opts.policy, Timestamp{});
  Timestamp last_activity{};
  std::uint64_t rtt_samples = 0;
  Duration min_rtt = std::numeric_limits<Duration>::max();

  std::array<std::uint8_t, 2048> buf;
  const auto drain_acks = [&]() {
    for (;;) {
      const ssize_t n = ::recv(fd, buf.data(), buf.size(), 0);
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) return;
        if (errno == ECONNREFUSED) return;  // ICMP bounce; treat as silence
        throw std::runtime_error(std::string("recv: ") + std::strerror(errno));
      }
      const auto pkt = WirePacket::decode(buf.data(), static_cast<std::size_t>(n));
      if (!pkt) continue;
      const Timestamp now = clock.now();
      const std::uint64_t before = session.acked_unique();
      session.on_ack(pkt->seq, Timestamp{static_cast<std::int64_t>(pkt->gen_time_ns)}, now);
      if (session.acked_unique() > before) {
        ++rtt_samples;
        min_rtt = std::min(min_rtt, session.min_rtt_seen());
      }
      last_activity = std::max(last_activity, now);
    }
  };

  // One logical owner: sends, ACK processing, and epoch transitions are all
  // serialized on this loop. Waits longer than ~2 ms park in poll(); shorter
  // ones spin on the clock so pacing stays accurate at high rates.
  const auto wait_until = [&](Timestamp deadline) {
    for (;;) {
      const Timestamp now = clock.now();
      if (now >= deadline) return;
      const Duration left = deadline - now;
      if (left > dur_ms(2)) {
        pollfd pfd{fd, POLLIN, 0};
        ::poll(&pfd, 1, static_cast<int>((left - dur_ms(1)) / 1'000'000));
        drain_acks();
      } else {
        drain_acks();
      }
    }
  };

  while (true) {
    drain_acks();
    const Timestamp now = clock.now();
    const bool budget_open = session.sent() < opts.packets;
    const Timestamp t_send = budget_open ? session.next_send_time() : kNoTime;
    const Timestamp t_ctrl = session.next_control_time();

    if (!budget_open) {
      // budget spent: listen for straggler ACKs, then close at the last
      // activity; finalize() folds the tail into one partial epoch
      const Duration rtt_guess =
          session.estimates_ready() ? static_cast<Duration>(session.rtt_bar_ns()) : dur_ms(100);
      const Timestamp drain_deadline =
          last_activity + std::max<Duration>(opts.drain_wait, 4 * rtt_guess);
      if (now >= drain_deadline) break;
      wait_until(std::min(drain_deadline, now + dur_ms(50)));
      continue;
    }

    const Timestamp next = std::min(t_send, t_ctrl);
    if (now < next) {
      wait_until(next);
      continue;
    }
    if (t_ctrl <= now) {
      session.on_control(now);
      continue;
    }
    if (t_send <= now) {
      WirePacket pkt;
      pkt.seq = session.next_seq();
      const Timestamp send_now = clock.now();
      pkt.gen_time_ns = static_cast<std::uint64_t>(send_now.ns);
      const auto bytes = pkt.encode();
      const ssize_t n = ::send(fd, bytes.data(), bytes.size(), 0);
      if (n < 0 && errno != ECONNREFUSED && errno != EAGAIN && errno != EWOULDBLOCK)
        throw std::runtime_error(std::string("send: ") + std::strerror(errno));
      session.note_sent(send_now);
      last_activity = std::max(last_activity, send_now);
    }
  }

  session.finalize(last_activity);
  out.epochs = session.rows();
  out.sender_summary = session.session_age_summary();
  out.sent = session.sent();
  out.acked_unique = session.acked_unique();
  out.duplicate_acks = session.duplicate_acks();
  out.unacked = out.sent - out.acked_unique;
  out.rtt_samples = rtt_samples;
  out.min_rtt = rtt_samples > 0 ? min_rtt : 0;
  out.session_len = last_activity - Timestamp{};
  return out;
}

}  // namespace agectl
