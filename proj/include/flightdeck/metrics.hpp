#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "flightdeck/json_util.hpp"

namespace flightdeck {

/// Latency histogram backed by raw samples; cheap at desk scale and gives
/// exact percentiles (nearest-rank on the sorted samples).
class Histogram {
 public:
  void record(double value) {
    std::lock_guard lock(m_);
    samples_.push_back(value);
  }

  size_t count() const {
    std::lock_guard lock(m_);
    return samples_.size();
  }

  struct Summary {
    uint64_t count = 0;
    double min = 0, max = 0, mean = 0;
    double p50 = 0, p95 = 0, p99 = 0;
  };

  Summary summarize() const {
    std::lock_guard lock(m_);
    Summary s;
    s.count = samples_.size();
    if (samples_.empty()) return s;
    std::vector<double> sorted = samples_;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    double sum = 0;
    for (double v : sorted) sum += v;
    s.mean = sum / double(sorted.size());
    s.p50 = percentile(sorted, 0.50);
    s.p95 = percentile(sorted, 0.95);
    s.p99 = percentile(sorted, 0.99);
    return s;
  }

  static Json summary_json(const Summary& s) {
    Json j;
    j["count"] = s.count;
    j["min"] = s.min;
    j["max"] = s.max;
    j["mean"] = s.mean;
    j["p50"] = s.p50;
    j["p95"] = s.p95;
    j["p99"] = s.p99;
    return j;
  }

 private:
  static double percentile(const std::vector<double>& sorted, double p) {
    size_t rank = size_t(std::ceil(p * double(sorted.size())));
    if (rank == 0) rank = 1;
    if (rank > sorted.size()) rank = sorted.size();
    return sorted[rank - 1];
  }

  mutable std::mutex m_;
  std::vector<double> samples_;
};

/// Shared counters the testbed components write into while a run is active.
struct MetricsHub {
  std::atomic<uint64_t> requests{0};
  std::atomic<uint64_t> errors{0};  // unrecovered failures: 5xx, stuck sagas
  std::atomic<uint64_t> rate_limited{0};
  std::atomic<uint64_t> events_consumed{0};
  std::atomic<uint64_t> notifications_written{0};
  std::atomic<uint64_t> bookings_confirmed{0};
  std::atomic<uint64_t> bookings_rejected{0};
  std::atomic<uint64_t> bookings_compensated{0};
  std::atomic<uint64_t> payment_attempts{0};
  std::atomic<uint64_t> payment_failures{0};
  std::atomic<uint64_t> clock_anomalies{0};
  std::atomic<uint64_t> probe_total{0};
  std::atomic<uint64_t> probe_success{0};

  Histogram response_ms;
  Histogram propagation_ms;

  void record_propagation(int64_t publish_ts_ns, int64_t apply_ts_ns) {
    int64_t delta = apply_ts_ns - publish_ts_ns;
    if (delta < 0) {
      // Clock anomaly: counted, excluded from the histogram.
      clock_anomalies.fetch_add(1);
      return;
    }
    propagation_ms.record(double(delta) / 1e6);
  }

  std::mutex samples_m;
  std::vector<double> inflight_samples;
  std::vector<Json> cpu_mem_samples;

  void record_inflight(double rate) {
    std::lock_guard lock(samples_m);
    inflight_samples.push_back(rate);
  }

  void record_cpu_mem(Json sample) {
    std::lock_guard lock(samples_m);
    cpu_mem_samples.push_back(std::move(sample));
  }
};

struct ConsistencyViolation {
  std::string id;
  std::string invariant;
};

struct ConsistencyReport {
  uint64_t total_bookings = 0;
  uint64_t consistent_bookings = 0;
  std::vector<ConsistencyViolation> violations;

  // Vacuously consistent when there is nothing to check.
  double rate() const {
    if (total_bookings == 0) return 1.0;
    return double(consistent_bookings) / double(total_bookings);
  }
};

/// Everything a run reports. Serializes canonically (sorted keys, stable
/// number formatting) so equal reports produce identical bytes.
struct MetricsReport {
  std::string scenario;
  uint64_t seed = 0;
  std::string transport;  // "inproc" | "http"
  std::string clock;      // "real" | "virtual"
  double duration_s = 0;

  double throughput_eps = 0;
  Histogram::Summary response_time_ms;
  Histogram::Summary propagation_latency_ms;

  uint64_t cache_hits = 0;
  uint64_t cache_misses = 0;
  uint64_t cache_evictions = 0;
  std::optional<double> cache_hit_ratio;

  double error_rate = 0;
  double consistency_rate_inflight = 1.0;
  double consistency_rate_final = 1.0;
  double availability = 1.0;

  uint64_t requests_total = 0;
  uint64_t errors_total = 0;
  uint64_t rate_limited_total = 0;
  uint64_t events_published = 0;
  uint64_t events_consumed = 0;
  uint64_t bookings_confirmed = 0;
  uint64_t bookings_rejected = 0;
  uint64_t bookings_compensated = 0;
  uint64_t notifications_written = 0;
  uint64_t payment_attempts = 0;
  uint64_t payment_failures = 0;
  uint64_t clock_anomalies = 0;
  uint64_t inflight_sample_count = 0;
  uint64_t probe_total = 0;
  uint64_t probe_success = 0;

  std::vector<Json> cpu_mem_samples;
  std::vector<ConsistencyViolation> final_violations;

  Json to_json() const {
    Json j;
    j["scenario"] = scenario;
    j["seed"] = seed;
    j["transport"] = transport;
    j["clock"] = clock;
    j["duration_s"] = duration_s;
    j["throughput_eps"] = throughput_eps;
    j["response_time_ms"] = Histogram::summary_json(response_time_ms);
    j["propagation_latency_ms"] =
        Histogram::summary_json(propagation_latency_ms);
    Json cache;
    cache["hits"] = cache_hits;
    cache["misses"] = cache_misses;
    cache["evictions"] = cache_evictions;
    if (cache_hit_ratio) {
      cache["hit_ratio"] = *cache_hit_ratio;
    } else {
      cache["hit_ratio"] = nullptr;
    }
    j["cache"] = cache;
    j["error_rate"] = error_rate;
    j["consistency_rate_inflight"] = consistency_rate_inflight;
    j["consistency_rate_final"] = consistency_rate_final;
    j["availability"] = availability;
    Json counts;
    counts["requests_total"] = requests_total;
    counts["errors_total"] = errors_total;
    counts["rate_limited_total"] = rate_limited_total;
    counts["events_published"] = events_published;
    counts["events_consumed"] = events_consumed;
    counts["bookings_confirmed"] = bookings_confirmed;
    counts["bookings_rejected"] = bookings_rejected;
    counts["bookings_compensated"] = bookings_compensated;
    counts["notifications_written"] = notifications_written;
    counts["payment_attempts"] = payment_attempts;
    counts["payment_failures"] = payment_failures;
    counts["clock_anomalies"] = clock_anomalies;
    counts["inflight_sample_count"] = inflight_sample_count;
    counts["probe_total"] = probe_total;
    counts["probe_success"] = probe_success;
    j["counts"] = counts;
    j["cpu_mem_samples"] = cpu_mem_samples;
    Json viol = Json::array();
    for (const auto& v : final_violations) {
      Json e;
      e["id"] = v.id;
      e["invariant"] = v.invariant;
      viol.push_back(e);
    }
    j["consistency_violations"] = viol;
    return j;
  }

  static Histogram::Summary summary_from_json(const Json& j) {
    Histogram::Summary s;
    s.count = j.value("count", uint64_t{0});
    s.min = j.value("min", 0.0);
    s.max = j.value("max", 0.0);
    s.mean = j.value("mean", 0.0);
    s.p50 = j.value("p50", 0.0);
    s.p95 = j.value("p95", 0.0);
    s.p99 = j.value("p99", 0.0);
    return s;
  }

  static MetricsReport from_json(const Json& j) {
    MetricsReport r;
    r.scenario = j.value("scenario", std::string{});
    r.seed = j.value("seed", uint64_t{0});
    r.transport = j.value("transport", std::string{});
    r.clock = j.value("clock", std::string{});
    r.duration_s = j.value("duration_s", 0.0);
    r.throughput_eps = j.value("throughput_eps", 0.0);
    if (j.contains("response_time_ms")) {
      r.response_time_ms = summary_from_json(j["response_time_ms"]);
    }
    if (j.contains("propagation_latency_ms")) {
      r.propagation_latency_ms = summary_from_json(j["propagation_latency_ms"]);
    }
    if (j.contains("cache")) {
      const Json& c = j["cache"];
      r.cache_hits = c.value("hits", uint64_t{0});
      r.cache_misses = c.value("misses", uint64_t{0});
      r.cache_evictions = c.value("evictions", uint64_t{0});
      if (c.contains("hit_ratio") && !c["hit_ratio"].is_null()) {
        r.cache_hit_ratio = c["hit_ratio"].get<double>();
      }
    }
    r.error_rate = j.value("error_rate", 0.0);
    r.consistency_rate_inflight = j.value("consistency_rate_inflight", 1.0);
    r.consistency_rate_final = j.value("consistency_rate_final", 1.0);
    r.availability = j.value("availability", 1.0);
    if (j.contains("counts")) {
      const Json& c = j["counts"];
      r.requests_total = c.value("requests_total", uint64_t{0});
      r.errors_total = c.value("errors_total", uint64_t{0});
      r.rate_limited_total = c.value("rate_limited_total", uint64_t{0});
      r.events_published = c.value("events_published", uint64_t{0});
      r.events_consumed = c.value("events_consumed", uint64_t{0});
      r.bookings_confirmed = c.value("bookings_confirmed", uint64_t{0});
      r.bookings_rejected = c.value("bookings_rejected", uint64_t{0});
      r.bookings_compensated = c.value("bookings_compensated", uint64_t{0});
      r.notifications_written = c.value("notifications_written", uint64_t{0});
      r.payment_attempts = c.value("payment_attempts", uint64_t{0});
      r.payment_failures = c.value("payment_failures", uint64_t{0});
      r.clock_anomalies = c.value("clock_anomalies", uint64_t{0});
      r.inflight_sample_count = c.value("inflight_sample_count", uint64_t{0});
      r.probe_total = c.value("probe_total", uint64_t{0});
      r.probe_success = c.value("probe_success", uint64_t{0});
    }
    if (j.contains("cpu_mem_samples")) {
      for (const auto& s : j["cpu_mem_samples"]) r.cpu_mem_samples.push_back(s);
    }
    if (j.contains("consistency_violations")) {
      for (const auto& v : j["consistency_violations"]) {
        r.final_violations.push_back(ConsistencyViolation{
            v.value("id", std::string{}), v.value("invariant", std::string{})});
      }
    }
    return r;
  }

  bool operator==(const MetricsReport& other) const {
    return to_json() == other.to_json();
  }

  // One row per metric, flattened with dotted paths.
  std::string to_csv() const {
    Json j = to_json();
    std::string out = "metric,value\n";
    flatten("", j, out);
    return out;
  }

  std::string to_text() const {
    auto fmt = [](double v) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3f", v);
      return std::string(buf);
    };
    std::string out;
    out += "scenario " + scenario + " (seed " + std::to_string(seed) +
           ", transport " + transport + ", clock " + clock + ")\n";
    out += "  duration_s               " + fmt(duration_s) + "\n";
    out += "  requests                 " + std::to_string(requests_total) + "\n";
    out += "  throughput_eps           " + fmt(throughput_eps) + "\n";
    out += "  response p50/p95/p99 ms  " + fmt(response_time_ms.p50) + " / " +
           fmt(response_time_ms.p95) + " / " + fmt(response_time_ms.p99) + "\n";
    out += "  propagation p99 ms       " + fmt(propagation_latency_ms.p99) + "\n";
    out += "  cache hit ratio          " +
           (cache_hit_ratio ? fmt(*cache_hit_ratio) : std::string("n/a")) + "\n";
    out += "  error_rate               " + fmt(error_rate) + "\n";
    out += "  consistency in-flight    " + fmt(consistency_rate_inflight) + "\n";
    out += "  consistency final        " + fmt(consistency_rate_final) + "\n";
    out += "  availability             " + fmt(availability) + "\n";
    out += "  bookings c/r/x           " + std::to_string(bookings_confirmed) +
           " / " + std::to_string(bookings_rejected) + " / " +
           std::to_string(bookings_compensated) + "\n";
    return out;
  }

 private:
  static void flatten(const std::string& prefix, const Json& j,
                      std::string& out) {
    if (j.is_object()) {
      for (auto it = j.begin(); it != j.end(); ++it) {
        flatten(prefix.empty() ? it.key() : prefix + "." + it.key(),
                it.value(), out);
      }
    } else if (j.is_array()) {
      out += prefix + "," + std::to_string(j.size()) + "\n";
    } else {
      out += prefix + "," + j.dump() + "\n";
    }
  }
};

}  // namespace flightdeck
