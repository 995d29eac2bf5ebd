#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "flightdeck/error.hpp"
#include "flightdeck/faults.hpp"
#include "flightdeck/fixtures.hpp"
#include "flightdeck/json_util.hpp"

namespace flightdeck {

enum class Transport { in_process, http };
enum class ClockMode { real, virtual_time };

inline const char* transport_name(Transport t) {
  return t == Transport::http ? "http" : "inproc";
}

inline const char* clock_mode_name(ClockMode c) {
  return c == ClockMode::virtual_time ? "virtual" : "real";
}

/// A runnable workload: request arrivals (Poisson, optionally ramped), an
/// operation mix, key skew over the search-key universe, fault injection and
/// the execution mode. The seed fully determines an in-process virtual-time
/// run.
struct WorkloadSpec {
  std::string name = "workload";
  double duration_s = 10;
  double arrival_rate = 100;       // requests/s; with ramp_to, the start rate
  double ramp_to = 0;              // 0 = constant rate
  std::map<std::string, double> mix = {{"search", 1.0}};
  double key_skew = 0;             // Zipf exponent over the key universe
  uint64_t key_universe = 10'000;  // distinct search keys
  int32_t seats_min = 1;
  int32_t seats_max = 1;
  uint64_t seed = 42;
  Transport transport = Transport::in_process;
  ClockMode clock = ClockMode::virtual_time;
  FaultConfig faults;
  FixtureParams fixtures;
  double inflight_sample_period_s = 0.1;

  double rate_at(double elapsed_s) const {
    if (ramp_to <= 0 || duration_s <= 0) return arrival_rate;
    double f = std::min(1.0, std::max(0.0, elapsed_s / duration_s));
    return arrival_rate + (ramp_to - arrival_rate) * f;
  }

  Status validate() const {
    if (duration_s < 0) {
      return make_error(Errc::invalid_argument, "duration_s must be >= 0");
    }
    if (arrival_rate < 0 || ramp_to < 0) {
      return make_error(Errc::invalid_argument, "arrival rates must be >= 0");
    }
    if (key_skew < 0) {
      return make_error(Errc::invalid_argument, "key_skew must be >= 0");
    }
    if (key_universe < 1) {
      return make_error(Errc::invalid_argument, "key_universe must be >= 1");
    }
    if (seats_min < 1 || seats_max < seats_min) {
      return make_error(Errc::invalid_argument, "invalid seats range");
    }
    double sum = 0;
    for (const auto& [op, fraction] : mix) {
      if (op != "search" && op != "book" && op != "trip" && op != "profile") {
        return make_error(Errc::invalid_argument, "unknown operation: " + op);
      }
      if (fraction < 0) {
        return make_error(Errc::invalid_argument, "negative mix fraction");
      }
      sum += fraction;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      return make_error(Errc::invalid_argument, "mix fractions must sum to 1");
    }
    if (transport == Transport::http && clock == ClockMode::virtual_time) {
      return make_error(Errc::invalid_argument,
                        "http transport requires the real clock");
    }
    return faults.validate();
  }

  static Result<WorkloadSpec> from_json(const Json& j) {
    if (!j.is_object()) {
      return Error{Errc::invalid_argument, "scenario must be a JSON object"};
    }
    WorkloadSpec w;
    w.name = j.value("name", w.name);
    w.duration_s = j.value("duration_s", w.duration_s);
    w.arrival_rate = j.value("arrival_rate", w.arrival_rate);
    w.ramp_to = j.value("ramp_to", w.ramp_to);
    if (j.contains("mix")) {
      w.mix.clear();
      for (auto it = j["mix"].begin(); it != j["mix"].end(); ++it) {
        w.mix[it.key()] = it.value().get<double>();
      }
    }
    w.key_skew = j.value("key_skew", w.key_skew);
    w.key_universe = j.value("key_universe", w.key_universe);
    w.seats_min = j.value("seats_min", w.seats_min);
    w.seats_max = j.value("seats_max", w.seats_max);
    w.seed = j.value("seed", w.seed);
    std::string transport = j.value("transport", std::string("inproc"));
    if (transport == "inproc") {
      w.transport = Transport::in_process;
    } else if (transport == "http") {
      w.transport = Transport::http;
    } else {
      return Error{Errc::invalid_argument, "unknown transport: " + transport};
    }
    std::string clock = j.value("clock", std::string("virtual"));
    if (clock == "virtual") {
      w.clock = ClockMode::virtual_time;
    } else if (clock == "real") {
      w.clock = ClockMode::real;
    } else {
      return Error{Errc::invalid_argument, "unknown clock mode: " + clock};
    }
    if (j.contains("faults")) w.faults = FaultConfig::from_json(j["faults"]);
    if (j.contains("fixtures")) {
      w.fixtures = FixtureParams::from_json(j["fixtures"]);
    }
    w.inflight_sample_period_s =
        j.value("inflight_sample_period_s", w.inflight_sample_period_s);
    if (Status s = w.validate(); !s.ok()) return s.error();
    return w;
  }

  Json to_json() const {
    Json j;
    j["name"] = name;
    j["duration_s"] = duration_s;
    j["arrival_rate"] = arrival_rate;
    j["ramp_to"] = ramp_to;
    Json m;
    for (const auto& [op, fraction] : mix) m[op] = fraction;
    j["mix"] = m;
    j["key_skew"] = key_skew;
    j["key_universe"] = key_universe;
    j["seats_min"] = seats_min;
    j["seats_max"] = seats_max;
    j["seed"] = seed;
    j["transport"] = transport_name(transport);
    j["clock"] = clock_mode_name(clock);
    j["faults"] = faults.to_json();
    j["fixtures"] = fixtures.to_json();
    j["inflight_sample_period_s"] = inflight_sample_period_s;
    return j;
  }
};

}  // namespace flightdeck
