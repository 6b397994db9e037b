#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace agectl {

// Fixed 21-byte datagram. The echo server reflects it byte-identical, so the
// layout doubles as the ACK format. All multi-byte fields are big-endian.
//
//   offset  size  field
//        0     4  magic "ACP1"
//        4     1  version (1)
//        5     4  seq
//        9     8  gen_time, nanoseconds on the sender's clock
//       17     4  payload (opaque)
struct WirePacket {
  static constexpr std::size_t kSize = 21;
  static constexpr std::array<std::uint8_t, 4> kMagic{0x41, 0x43, 0x50, 0x31};
  static constexpr std::uint8_t kVersion = 1;

  std::uint32_t seq{0};
  std::uint64_t gen_time_ns{0};
  std::array<std::uint8_t, 4> payload{};

  std::array<std::uint8_t, kSize> encode() const;
  static std::optional<WirePacket> decode(const std::uint8_t* data, std::size_t len);
};

}  // namespace agectl
