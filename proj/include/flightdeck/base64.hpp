#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace flightdeck {

namespace detail {
inline constexpr char kB64Std[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
inline constexpr char kB64Url[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

inline std::string b64_encode(std::string_view in, const char* alphabet,
                              bool pad) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 3 <= in.size()) {
    uint32_t v = (uint32_t(uint8_t(in[i])) << 16) |
                 (uint32_t(uint8_t(in[i + 1])) << 8) | uint8_t(in[i + 2]);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
    i += 3;
  }
  size_t rem = in.size() - i;
  if (rem == 1) {
    uint32_t v = uint32_t(uint8_t(in[i])) << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    if (pad) out.append("==");
  } else if (rem == 2) {
    uint32_t v = (uint32_t(uint8_t(in[i])) << 16) |
                 (uint32_t(uint8_t(in[i + 1])) << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    if (pad) out.push_back('=');
  }
  return out;
}

inline std::array<int8_t, 256> b64_table(const char* alphabet) {
  std::array<int8_t, 256> t;
  t.fill(-1);
  for (int i = 0; i < 64; ++i) t[uint8_t(alphabet[i])] = int8_t(i);
  return t;
}

inline std::optional<std::string> b64_decode(std::string_view in,
                                             const std::array<int8_t, 256>& t) {
  while (!in.empty() && in.back() == '=') in.remove_suffix(1);
  if (in.size() % 4 == 1) return std::nullopt;
  std::string out;
  out.reserve(in.size() * 3 / 4);
  uint32_t acc = 0;
  int bits = 0;
  for (char c : in) {
    int8_t v = t[uint8_t(c)];
    if (v < 0) return std::nullopt;
    acc = (acc << 6) | uint32_t(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(char((acc >> bits) & 0xff));
    }
  }
  return out;
}
}  // namespace detail

inline std::string base64_encode(std::string_view in) {
  return detail::b64_encode(in, detail::kB64Std, true);
}

inline std::optional<std::string> base64_decode(std::string_view in) {
  static const auto table = detail::b64_table(detail::kB64Std);
  return detail::b64_decode(in, table);
}

// URL-safe alphabet, no padding. This is the token segment encoding.
inline std::string base64url_encode(std::string_view in) {
  return detail::b64_encode(in, detail::kB64Url, false);
}

inline std::optional<std::string> base64url_decode(std::string_view in) {
  static const auto table = detail::b64_table(detail::kB64Url);
  return detail::b64_decode(in, table);
}

}  // namespace flightdeck
