#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace agectl {

// All clocks run on signed integer nanoseconds since the experiment epoch.
// Durations are plain int64 ns; areas under age curves accumulate in 128-bit
// integers so windowed averages can be checked bit-exactly.
using Duration = std::int64_t;
using AreaNs2 = __int128;

struct Timestamp {
  std::int64_t ns{0};
  constexpr auto operator<=>(const Timestamp&) const = default;
};

// Sentinel for "no event scheduled".
inline constexpr Timestamp kNoTime{std::numeric_limits<std::int64_t>::max()};

constexpr Duration operator-(Timestamp a, Timestamp b) { return a.ns - b.ns; }

inline Timestamp operator+(Timestamp t, Duration d) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(t.ns, d, &out))
    throw std::overflow_error("timestamp arithmetic overflow");
  if (out < 0) throw std::underflow_error("timestamp before experiment epoch");
  return Timestamp{out};
}

constexpr Duration dur_us(std::int64_t v) { return v * 1'000; }
constexpr Duration dur_ms(std::int64_t v) { return v * 1'000'000; }
constexpr Duration dur_s(std::int64_t v) { return v * 1'000'000'000; }

inline Duration dur_from_ms(double ms) {
  return static_cast<Duration>(std::llround(ms * 1e6));
}
inline Duration dur_from_s(double s) {
  return static_cast<Duration>(std::llround(s * 1e9));
}

constexpr double to_ms(Duration d) { return static_cast<double>(d) / 1e6; }
constexpr double to_s(Duration d) { return static_cast<double>(d) / 1e9; }

inline std::string i128_to_string(AreaNs2 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : v;
  std::string s;
  while (u > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  return neg ? "-" + s : s;
}

}  // namespace agectl
