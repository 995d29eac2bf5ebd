#pragma once

#include <json.hpp>

namespace flightdeck {

// nlohmann::json keeps object keys in std::map order, so dump() is already a
// canonical serialization: same content, same bytes.
using Json = nlohmann::json;

inline Json parse_json(std::string_view text, bool* ok = nullptr) {
  Json j = Json::parse(text, nullptr, false);
  if (ok) *ok = !j.is_discarded();
  return j;
}

inline std::string get_string(const Json& j, const char* key,
                              const std::string& fallback = {}) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return fallback;
  return it->get<std::string>();
}

}  // namespace flightdeck
