#include "agectl/wire.hpp"

#include <algorithm>

namespace agectl {

namespace {

void put_be32(std::uint8_t* p, std::uint32_t v) {
  p[0] = static_cast<std::uint8_t>(v >> 24);
  p[1] = static_cast<std::uint8_t>(v >> 16);
  p[2] = static_cast<std::uint8_t>(v >> 8);
  p[3] = static_cast<std::uint8_t>(v);
}

void put_be64(std::uint8_t* p, std::uint64_t v) {
  put_be32(p, static_cast<std::uint32_t>(v >> 32));
  put_be32(p + 4, static_cast<std::uint32_t>(v));
}

std::uint32_t get_be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

std::uint64_t get_be64(const std::uint8_t* p) {
  return (static_cast<std::uint64_t>(get_be32(p)) << 32) | get_be32(p + 4);
}

}  // namespace

std::array<std::uint8_t, WirePacket::kSize> WirePacket::encode() const {
  std::array<std::uint8_t, kSize> out{};
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  out[4] = kVersion;
  put_be32(out.data() + 5, seq);
  put_be64(out.data() + 9, gen_time_ns);
  std::copy(payload.begin(), payload.end(), out.begin() + 17);
  return out;
}

std::optional<WirePacket> WirePacket::decode(const std::uint8_t* data, std::size_t len) {
  if (len != kSize) return std::nullopt;
  if (!std::equal(kMagic.begin(), kMagic.end(), data)) return std::nullopt;
  if (data[4] != kVersion) return std::nullopt;
  WirePacket pkt;
  pkt.seq = get_be32(data + 5);
  pkt.gen_time_ns = get_be64(data + 9);
  std::copy(data + 17, data + 21, pkt.payload.begin());
  return pkt;
}

}  // namespace agectl
