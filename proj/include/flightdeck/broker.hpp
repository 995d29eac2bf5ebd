#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "flightdeck/base64.hpp"
#include "flightdeck/clock.hpp"
#include "flightdeck/error.hpp"
#include "flightdeck/hash.hpp"
#include "flightdeck/json_util.hpp"

namespace flightdeck {

struct EventRecord {
  std::string topic;
  uint32_t partition = 0;
  uint64_t offset = 0;
  std::string key;
  std::string payload;
  int64_t publish_ts_ns = 0;
  std::string correlation_id;
};

struct QueueMessage {
  std::string queue;
  uint64_t delivery_tag = 0;
  std::string payload;
  uint32_t attempt = 1;
  int64_t visible_at_ns = 0;
};

/// Embedded dual-mode messaging. Topics are append-only partitioned logs read
/// through independent consumer-group cursors; every group sees every record.
/// Queues are ack-based with a visibility timeout: a received message stays
/// invisible until acked, nacked, or the timeout lapses, after which it is
/// redelivered with a fresh delivery tag.
class Broker {
 public:
  explicit Broker(Clock* clock) : clock_(clock) {}

  Status create_topic(const std::string& name, uint32_t partitions) {
    if (partitions < 1) {
      return make_error(Errc::invalid_argument, "partitions must be >= 1");
    }
    std::lock_guard lock(m_);
    if (topics_.count(name)) {
      return make_error(Errc::already_exists, "topic exists: " + name);
    }
    topics_[name].partitions.resize(partitions);
    return {};
  }

  Result<std::pair<uint32_t, uint64_t>> publish(
      const std::string& topic, const std::string& key,
      const std::string& payload, const std::string& correlation_id = {}) {
    std::unique_lock lock(m_);
    auto it = topics_.find(topic);
    if (it == topics_.end()) {
      return Error{Errc::not_found, "unknown topic: " + topic};
    }
    auto& t = it->second;
    uint32_t partition =
        uint32_t(fnv1a64(key) % uint64_t(t.partitions.size()));
    auto& log = t.partitions[partition].log;
    EventRecord rec;
    rec.topic = topic;
    rec.partition = partition;
    rec.offset = log.size();
    rec.key = key;
    rec.payload = payload;
    rec.correlation_id = correlation_id;
    // The lock spans the timestamp and the append, which keeps publish
    // timestamps non-decreasing within a partition.
    rec.publish_ts_ns = clock_->now_ns();
    log.push_back(std::move(rec));
    published_.fetch_add(1, std::memory_order_relaxed);
    lock.unlock();
    data_cv_.notify_all();
    return std::make_pair(partition, log.back().offset);
  }

  /// Up to `max` records strictly after the group's committed offsets, in
  /// per-partition order. Polling does not advance the cursor; only commit
  /// does, so uncommitted records are redelivered on the next poll.
  Result<std::vector<EventRecord>> poll(const std::string& topic,
                                        const std::string& group, size_t max,
                                        int64_t timeout_ns = 0) {
    std::unique_lock lock(m_);
    auto it = topics_.find(topic);
    if (it == topics_.end()) {
      return Error{Errc::not_found, "unknown topic: " + topic};
    }
    std::vector<EventRecord> out = collect_locked(it->second, topic, group, max);
    if (out.empty() && timeout_ns > 0 && !clock_->is_virtual()) {
      data_cv_.wait_for(lock, std::chrono::nanoseconds(timeout_ns), [&] {
        out = collect_locked(topics_[topic], topic, group, max);
        return !out.empty();
      });
    }
    return out;
  }

  Status commit(const std::string& group, const std::string& topic,
                uint32_t partition, uint64_t offset) {
    std::lock_guard lock(m_);
    auto it = topics_.find(topic);
    if (it == topics_.end()) {
      return make_error(Errc::not_found, "unknown topic: " + topic);
    }
    auto& t = it->second;
    if (partition >= t.partitions.size()) {
      return make_error(Errc::out_of_range, "no such partition");
    }
    const auto& log = t.partitions[partition].log;
    if (log.empty() || offset >= log.size()) {
      return make_error(Errc::out_of_range, "offset beyond log end");
    }
    auto& cursor = groups_[GroupKey{group, topic}];
    cursor.resize(t.partitions.size(), -1);
    cursor[partition] = int64_t(offset);
    return {};
  }

  uint64_t enqueue(const std::string& queue, const std::string& payload) {
    std::unique_lock lock(m_);
    auto& q = queues_[queue];  // queues are declared on first use
    Message msg;
    msg.id = next_message_id_++;
    msg.payload = payload;
    msg.visible_at_ns = clock_->now_ns();
    uint64_t id = msg.id;
    q.messages.emplace(id, std::move(msg));
    lock.unlock();
    data_cv_.notify_all();
    return id;
  }

  std::optional<QueueMessage> receive(const std::string& queue,
                                      int64_t visibility_timeout_ns) {
    std::lock_guard lock(m_);
    auto it = queues_.find(queue);
    if (it == queues_.end()) return std::nullopt;
    auto& q = it->second;
    int64_t now = clock_->now_ns();
    for (auto& [id, msg] : q.messages) {
      if (msg.visible_at_ns > now) continue;
      msg.attempt += 1;
      msg.visible_at_ns = now + visibility_timeout_ns;
      msg.current_tag = next_tag_++;
      QueueMessage out;
      out.queue = queue;
      out.delivery_tag = msg.current_tag;
      out.payload = msg.payload;
      out.attempt = msg.attempt;
      out.visible_at_ns = msg.visible_at_ns;
      return out;
    }
    return std::nullopt;
  }

  /// Removes the message permanently. The tag must belong to a delivery whose
  /// visibility window is still open; once the message expired back to
  /// visible (or was redelivered) the old tag is stale.
  Status ack(const std::string& queue, uint64_t delivery_tag) {
    std::lock_guard lock(m_);
    auto [q, id] = find_delivery_locked(queue, delivery_tag);
    if (q == nullptr) {
      return make_error(Errc::stale_tag, "unknown or expired delivery tag");
    }
    q->messages.erase(id);
    return {};
  }

  /// Returns the message to the visible pool immediately; the next receive
  /// redelivers it with attempt incremented.
  Status nack(const std::string& queue, uint64_t delivery_tag) {
    std::lock_guard lock(m_);
    auto [q, id] = find_delivery_locked(queue, delivery_tag);
    if (q == nullptr) {
      return make_error(Errc::stale_tag, "unknown or expired delivery tag");
    }
    auto& msg = q->messages[id];
    msg.visible_at_ns = clock_->now_ns();
    msg.current_tag = 0;
    return {};
  }

  // --- introspection ---

  Result<uint64_t> partition_size(const std::string& topic,
                                  uint32_t partition) const {
    std::lock_guard lock(m_);
    auto it = topics_.find(topic);
    if (it == topics_.end()) return Error{Errc::not_found, "unknown topic"};
    if (partition >= it->second.partitions.size()) {
      return Error{Errc::out_of_range, "no such partition"};
    }
    return uint64_t(it->second.partitions[partition].log.size());
  }

  std::vector<EventRecord> read_topic(const std::string& topic) const {
    std::lock_guard lock(m_);
    std::vector<EventRecord> out;
    auto it = topics_.find(topic);
    if (it == topics_.end()) return out;
    for (const auto& p : it->second.partitions) {
      out.insert(out.end(), p.log.begin(), p.log.end());
    }
    return out;
  }

  std::vector<std::string> topic_names() const {
    std::lock_guard lock(m_);
    std::vector<std::string> out;
    for (const auto& [name, t] : topics_) out.push_back(name);
    return out;
  }

  // True when the group has committed every record of the topic.
  bool fully_committed(const std::string& topic,
                       const std::string& group) const {
    std::lock_guard lock(m_);
    auto it = topics_.find(topic);
    if (it == topics_.end()) return true;
    auto g = groups_.find(GroupKey{group, topic});
    for (size_t p = 0; p < it->second.partitions.size(); ++p) {
      const auto& log = it->second.partitions[p].log;
      if (log.empty()) continue;
      int64_t committed = -1;
      if (g != groups_.end() && p < g->second.size()) committed = g->second[p];
      if (committed + 1 < int64_t(log.size())) return false;
    }
    return true;
  }

  size_t queue_depth(const std::string& queue) const {
    std::lock_guard lock(m_);
    auto it = queues_.find(queue);
    return it == queues_.end() ? 0 : it->second.messages.size();
  }

  uint64_t total_published() const { return published_.load(); }

  // One JSON object per record, for debugging.
  void dump_topics(std::ostream& os) const {
    std::lock_guard lock(m_);
    for (const auto& [name, t] : topics_) {
      for (const auto& p : t.partitions) {
        for (const auto& rec : p.log) {
          Json line;
          line["topic"] = rec.topic;
          line["partition"] = rec.partition;
          line["offset"] = rec.offset;
          line["key"] = rec.key;
          line["payload_b64"] = base64_encode(rec.payload);
          line["publish_ts_ns"] = rec.publish_ts_ns;
          os << line.dump() << "\n";
        }
      }
    }
  }

 private:
  struct Partition {
    std::vector<EventRecord> log;
  };

  struct Topic {
    std::vector<Partition> partitions;
  };

  struct Message {
    uint64_t id = 0;
    std::string payload;
    uint32_t attempt = 0;        // incremented on each delivery
    int64_t visible_at_ns = 0;
    uint64_t current_tag = 0;    // 0 when not in flight
  };

  struct Queue {
    std::map<uint64_t, Message> messages;  // keyed by id: FIFO by arrival
  };

  using GroupKey = std::pair<std::string, std::string>;  // (group, topic)

  std::vector<EventRecord> collect_locked(const Topic& t,
                                          const std::string& topic,
                                          const std::string& group,
                                          size_t max) {
    std::vector<EventRecord> out;
    auto g = groups_.find(GroupKey{group, topic});
    for (size_t p = 0; p < t.partitions.size() && out.size() < max; ++p) {
      int64_t committed = -1;
      if (g != groups_.end() && p < g->second.size()) committed = g->second[p];
      const auto& log = t.partitions[p].log;
      for (uint64_t o = uint64_t(committed + 1);
           o < log.size() && out.size() < max; ++o) {
        out.push_back(log[o]);
      }
    }
    return out;
  }

  // Locates the message a tag refers to, if the delivery is still in flight.
  std::pair<Queue*, uint64_t> find_delivery_locked(const std::string& queue,
                                                   uint64_t tag) {
    auto it = queues_.find(queue);
    if (it == queues_.end()) return {nullptr, 0};
    int64_t now = clock_->now_ns();
    for (auto& [id, msg] : it->second.messages) {
      if (msg.current_tag == tag && tag != 0 && msg.visible_at_ns > now) {
        return {&it->second, id};
      }
    }
    return {nullptr, 0};
  }

  Clock* clock_;
  mutable std::mutex m_;
  std::condition_variable data_cv_;
  std::map<std::string, Topic> topics_;
  std::map<std::string, Queue> queues_;
  std::map<GroupKey, std::vector<int64_t>> groups_;
  uint64_t next_message_id_ = 1;
  uint64_t next_tag_ = 1;
  std::atomic<uint64_t> published_{0};
};

}  // namespace flightdeck
