#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "flightdeck/domain.hpp"
#include "flightdeck/json_util.hpp"
#include "flightdeck/rand.hpp"

namespace flightdeck {

inline const std::vector<std::string>& fixture_airports() {
  static const std::vector<std::string> codes = {
      "DAC", "DXB", "JFK", "LHR", "SIN", "HND", "CDG", "AMS", "FRA", "IST",
      "DOH", "BKK", "DEL", "SYD", "GRU", "ORD", "LAX", "YYZ", "CPT", "NBO"};
  return codes;
}

struct FixtureParams {
  int flights = 200;
  int users = 1000;
  int date_count = 27;              // consecutive departure dates
  std::string first_date = "2026-09-01";
  int capacity_min = 80;
  int capacity_max = 220;
  int capacity_override = 0;        // > 0 pins every flight to this capacity

  static FixtureParams from_json(const Json& j) {
    FixtureParams p;
    p.flights = j.value("flights", p.flights);
    p.users = j.value("users", p.users);
    p.date_count = j.value("date_count", p.date_count);
    p.capacity_min = j.value("capacity_min", p.capacity_min);
    p.capacity_max = j.value("capacity_max", p.capacity_max);
    p.capacity_override = j.value("capacity_override", p.capacity_override);
    return p;
  }

  Json to_json() const {
    Json j;
    j["flights"] = flights;
    j["users"] = users;
    j["date_count"] = date_count;
    j["capacity_min"] = capacity_min;
    j["capacity_max"] = capacity_max;
    j["capacity_override"] = capacity_override;
    return j;
  }
};

// Ordered (origin, destination) route pairs over the airport list. Search
// keys index into this table, so the key universe is stable across runs.
inline std::pair<std::string, std::string> fixture_route(size_t index) {
  const auto& a = fixture_airports();
  size_t n = a.size();
  size_t pairs = n * (n - 1);
  index %= pairs;
  size_t o = index / (n - 1);
  size_t d = index % (n - 1);
  if (d >= o) ++d;
  return {a[o], a[d]};
}

inline size_t fixture_route_count() {
  size_t n = fixture_airports().size();
  return n * (n - 1);
}

// first_date is day 0; dates step one day, formatted YYYY-MM-DD. Fixture
// dates stay inside one month so the arithmetic stays trivial.
inline std::string fixture_date(const std::string& first_date, int day_index) {
  int year = std::atoi(first_date.substr(0, 4).c_str());
  int month = std::atoi(first_date.substr(5, 2).c_str());
  int day = std::atoi(first_date.substr(8, 2).c_str()) + day_index;
  static const int days_in_month[] = {31, 28, 31, 30, 31, 30,
                                      31, 31, 30, 31, 30, 31};
  while (day > days_in_month[month - 1]) {
    day -= days_in_month[month - 1];
    if (++month > 12) {
      month = 1;
      ++year;
    }
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

struct UserFixture {
  std::string user_id;
  std::string password;
  std::string salt;
  std::vector<std::string> scopes;
  Json profile;
};

struct FixtureSet {
  std::vector<Flight> flights;
  std::vector<UserFixture> users;
};

/// Deterministic dataset: flights spread over the route/date grid and users
/// with seeded preferences. The same seed and params always produce the same
/// bytes.
inline FixtureSet generate_fixtures(const FixtureParams& params,
                                    uint64_t seed) {
  FixtureSet out;
  Rng rng(derive_seed(seed, "fixtures"));

  for (int i = 0; i < params.flights; ++i) {
    Flight f;
    char id[16];
    std::snprintf(id, sizeof(id), "FL-%04d", i + 1);
    f.flight_id = id;
    auto route = fixture_route(rng.below(fixture_route_count()));
    f.origin = route.first;
    f.destination = route.second;
    int day = int(rng.below(uint64_t(params.date_count)));
    f.date = fixture_date(params.first_date, day);
    // 2026-09-01T00:00:00Z plus the day offset and a departure hour
    f.departure_ts = 1'788'220'800 + int64_t(day) * 86400 +
                     rng.range(5, 22) * 3600;
    f.capacity = params.capacity_override > 0
                     ? params.capacity_override
                     : int32_t(rng.range(params.capacity_min,
                                         params.capacity_max));
    f.seats_available = f.capacity;
    f.price = rng.range(80, 900) * 100;  // minor units
    out.flights.push_back(std::move(f));
  }

  for (int i = 0; i < params.users; ++i) {
    UserFixture u;
    char id[24];
    std::snprintf(id, sizeof(id), "user-%04d", i + 1);
    u.user_id = id;
    u.password = "pw-" + u.user_id;
    char salt[24];
    std::snprintf(salt, sizeof(salt), "%016llx",
                  (unsigned long long)rng.next_u64());
    u.salt = salt;
    u.scopes = {"booking.read", "booking.write", "payment.read",
                "profile.read", "profile.write"};
    if (i < 5) u.scopes.push_back("admin");
    Json profile;
    profile["user_id"] = u.user_id;
    char name[32];
    std::snprintf(name, sizeof(name), "User %04d", i + 1);
    profile["name"] = name;
    Json prefs;
    prefs["notify"] = rng.uniform01() < 0.8 ? "email" : "sms";
    prefs["seat"] = rng.uniform01() < 0.5 ? "aisle" : "window";
    profile["preferences"] = prefs;
    profile["loyalty_points"] = int64_t(rng.below(50'000));
    u.profile = profile;
    out.users.push_back(std::move(u));
  }
  return out;
}

}  // namespace flightdeck
