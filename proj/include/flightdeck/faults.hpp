#pragma once

#include <cstdint>
#include <mutex>
#include <optional>

#include "flightdeck/clock.hpp"
#include "flightdeck/error.hpp"
#include "flightdeck/hash.hpp"
#include "flightdeck/json_util.hpp"
#include "flightdeck/rand.hpp"

namespace flightdeck {

struct LatencyDist {
  std::string dist = "lognormal";
  double mean_ms = 0;
  double sigma = 0.5;
};

struct FaultConfig {
  double payment_fail_prob = 0;
  double duplicate_delivery_prob = 0;
  double consumer_restart_period_s = 0;  // 0 = off
  double consumer_restart_downtime_s = 0.5;
  std::optional<LatencyDist> added_latency;

  Status validate() const {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(payment_fail_prob) || !in_unit(duplicate_delivery_prob)) {
      return make_error(Errc::invalid_argument,
                        "fault probabilities must be in [0,1]");
    }
    if (consumer_restart_period_s < 0) {
      return make_error(Errc::invalid_argument,
                        "consumer_restart_period_s must be >= 0");
    }
    return {};
  }

  static FaultConfig from_json(const Json& j) {
    FaultConfig f;
    f.payment_fail_prob = j.value("payment_fail_prob", 0.0);
    f.duplicate_delivery_prob = j.value("duplicate_delivery_prob", 0.0);
    f.consumer_restart_period_s = j.value("consumer_restart_period_s", 0.0);
    f.consumer_restart_downtime_s =
        j.value("consumer_restart_downtime_s", 0.5);
    if (j.contains("added_latency") && !j["added_latency"].is_null()) {
      LatencyDist d;
      d.dist = j["added_latency"].value("dist", std::string("lognormal"));
      d.mean_ms = j["added_latency"].value("mean_ms", 0.0);
      d.sigma = j["added_latency"].value("sigma", 0.5);
      f.added_latency = d;
    }
    return f;
  }

  Json to_json() const {
    Json j;
    j["payment_fail_prob"] = payment_fail_prob;
    j["duplicate_delivery_prob"] = duplicate_delivery_prob;
    j["consumer_restart_period_s"] = consumer_restart_period_s;
    j["consumer_restart_downtime_s"] = consumer_restart_downtime_s;
    if (added_latency) {
      Json d;
      d["dist"] = added_latency->dist;
      d["mean_ms"] = added_latency->mean_ms;
      d["sigma"] = added_latency->sigma;
      j["added_latency"] = d;
    } else {
      j["added_latency"] = nullptr;
    }
    return j;
  }
};

/// Seeded fault injector. Each fault kind draws from its own stream so that
/// enabling one fault does not shift the draws of another.
class FaultPlan {
 public:
  FaultPlan(const FaultConfig& config, uint64_t seed, int64_t run_start_ns)
      : config_(config),
        run_start_ns_(run_start_ns),
        payment_rng_(derive_seed(seed, "faults.payment")),
        dup_rng_(derive_seed(seed, "faults.duplicate")),
        latency_rng_(derive_seed(seed, "faults.latency")) {}

  const FaultConfig& config() const { return config_; }

  bool draw_payment_failure() {
    std::lock_guard lock(m_);
    return payment_rng_.bernoulli(config_.payment_fail_prob);
  }

  bool draw_duplicate_delivery() {
    std::lock_guard lock(m_);
    return dup_rng_.bernoulli(config_.duplicate_delivery_prob);
  }

  int64_t draw_added_latency_ns() {
    if (!config_.added_latency || config_.added_latency->mean_ms <= 0) return 0;
    std::lock_guard lock(m_);
    double ms = latency_rng_.lognormal_mean(config_.added_latency->mean_ms,
                                            config_.added_latency->sigma);
    return int64_t(ms * double(kNsPerMs));
  }

  // Consumers go offline for a short window at the start of every restart
  // period (the first period boundary is the first restart).
  bool consumer_online(int64_t now_ns) const {
    if (config_.consumer_restart_period_s <= 0) return true;
    int64_t period = int64_t(config_.consumer_restart_period_s * kNsPerSec);
    int64_t downtime = int64_t(config_.consumer_restart_downtime_s * kNsPerSec);
    int64_t elapsed = now_ns - run_start_ns_;
    if (elapsed < period) return true;
    return (elapsed % period) >= downtime;
  }

 private:
  FaultConfig config_;
  int64_t run_start_ns_;
  mutable std::mutex m_;
  Rng payment_rng_;
  Rng dup_rng_;
  Rng latency_rng_;
};

}  // namespace flightdeck
