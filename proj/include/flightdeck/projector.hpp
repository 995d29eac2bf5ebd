#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "flightdeck/broker.hpp"
#include "flightdeck/clock.hpp"
#include "flightdeck/domain.hpp"
#include "flightdeck/faults.hpp"
#include "flightdeck/metrics.hpp"
#include "flightdeck/store.hpp"

namespace flightdeck {

/// Topic consumer that folds booking, payment and inventory events into a
/// per-booking read model. This is the consumer side of every propagation
/// measurement: one sample per applied event, publish timestamp to apply
/// timestamp.
///
/// With an added-latency fault configured, each event is held until
/// publish_ts + drawn delay before it is applied, which models a slow
/// downstream without touching the broker.
class ReadModelProjector {
 public:
  static constexpr const char* kGroup = "projector";

  ReadModelProjector(Clock* clock, Broker* broker, FaultPlan* faults,
                     MetricsHub* metrics)
      : clock_(clock), broker_(broker), faults_(faults), metrics_(metrics) {
    topics_ = {kTopicBookings, kTopicPayments, kTopicInventory};
  }

  /// Polls every topic once and applies what is ready. Returns the number of
  /// events applied. Offsets commit after each applied batch, so a restart
  /// replays at-least-once into idempotent upserts.
  size_t pump(size_t max_batch = 256, int64_t poll_timeout_ns = 0) {
    if (!faults_->consumer_online(clock_->now_ns())) return 0;
    size_t applied = drain_ready();
    for (const auto& topic : topics_) {
      auto polled = broker_->poll(topic, kGroup, max_batch, poll_timeout_ns);
      if (!polled.ok()) continue;
      uint64_t max_offset[kMaxPartitions] = {0};
      bool any[kMaxPartitions] = {false};
      for (const auto& rec : polled.value()) {
        int64_t delay = faults_->draw_added_latency_ns();
        if (delay > 0 && rec.publish_ts_ns + delay > clock_->now_ns()) {
          std::lock_guard lock(held_m_);
          held_.push(Held{rec.publish_ts_ns + delay, rec});
        } else {
          apply(rec);
          ++applied;
        }
        if (rec.partition < kMaxPartitions) {
          max_offset[rec.partition] = rec.offset;
          any[rec.partition] = true;
        }
      }
      for (uint32_t p = 0; p < kMaxPartitions; ++p) {
        if (any[p]) broker_->commit(kGroup, topic, p, max_offset[p]);
      }
    }
    return applied;
  }

  // Earliest pending held-event time, so a scheduler can wake exactly then.
  std::optional<int64_t> earliest_held_ns() const {
    std::lock_guard lock(held_m_);
    if (held_.empty()) return std::nullopt;
    return held_.top().ready_at_ns;
  }

  bool drained() const {
    {
      std::lock_guard lock(held_m_);
      if (!held_.empty()) return false;
    }
    for (const auto& topic : topics_) {
      if (!broker_->fully_committed(topic, kGroup)) return false;
    }
    return true;
  }

  uint64_t applied_count() const { return applied_.load(); }

  const DocumentStore& read_model() const { return model_; }

 private:
  static constexpr uint32_t kMaxPartitions = 64;

  struct Held {
    int64_t ready_at_ns;
    EventRecord record;
    bool operator>(const Held& other) const {
      return ready_at_ns > other.ready_at_ns;
    }
  };

  size_t drain_ready() {
    size_t n = 0;
    int64_t now = clock_->now_ns();
    for (;;) {
      Held h;
      {
        std::lock_guard lock(held_m_);
        if (held_.empty() || held_.top().ready_at_ns > now) break;
        h = held_.top();
        held_.pop();
      }
      apply(h.record);
      ++n;
    }
    return n;
  }

  void apply(const EventRecord& rec) {
    int64_t apply_ts = clock_->now_ns();
    metrics_->record_propagation(rec.publish_ts_ns, apply_ts);
    metrics_->events_consumed.fetch_add(1);
    applied_.fetch_add(1);

    Json body = parse_json(rec.payload);
    std::string event = body.value("event", std::string{});
    std::string doc_id = body.value("booking_id", std::string{});
    if (doc_id.empty()) doc_id = body.value("flight_id", std::string{});
    if (doc_id.empty()) doc_id = rec.key;
    Json doc;
    if (auto existing = model_.get("trips", doc_id)) doc = *existing;
    doc["doc_id"] = doc_id;
    doc[event.empty() ? "last_event" : event] = body;
    doc["applied_ts_ns"] = apply_ts;
    model_.put("trips", doc_id, doc);
  }

  Clock* clock_;
  Broker* broker_;
  FaultPlan* faults_;
  MetricsHub* metrics_;
  std::vector<std::string> topics_;
  DocumentStore model_;
  mutable std::mutex held_m_;
  std::priority_queue<Held, std::vector<Held>, std::greater<Held>> held_;
  std::atomic<uint64_t> applied_{0};
};

}  // namespace flightdeck
