#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "flightdeck/clock.hpp"
#include "flightdeck/error.hpp"

namespace flightdeck {

/// Two expiry classes: volatile data (seat availability, search results)
/// lives briefly, slow-moving data (profiles, sessions) lives an hour.
enum class TtlClass { kShort, kLong };

inline constexpr int64_t kShortTtlNs = 120 * kNsPerSec;
inline constexpr int64_t kLongTtlNs = 3600 * kNsPerSec;

inline int64_t ttl_ns(TtlClass c) {
  return c == TtlClass::kShort ? kShortTtlNs : kLongTtlNs;
}

struct CacheStats {
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t evictions = 0;

  // Undefined until the first lookup.
  std::optional<double> hit_ratio() const {
    uint64_t total = hits + misses;
    if (total == 0) return std::nullopt;
    return double(hits) / double(total);
  }
};

/// TTL-bounded LRU cache with loader fallback. get_or_load is single-flight:
/// concurrent misses on one key share a single loader invocation.
class TtlCache {
 public:
  using Loader = std::function<Result<std::string>()>;

  explicit TtlCache(Clock* clock, size_t capacity = 100'000)
      : clock_(clock), capacity_(capacity) {}

  void put(const std::string& key, std::string value, TtlClass cls) {
    std::lock_guard lock(m_);
    put_locked(key, std::move(value), cls);
  }

  std::optional<std::string> get(const std::string& key) {
    std::lock_guard lock(m_);
    return lookup_locked(key, true);
  }

  Result<std::string> get_or_load(const std::string& key, const Loader& loader,
                                  TtlClass cls) {
    std::shared_ptr<Flight> flight;
    {
      std::unique_lock lock(m_);
      auto hit = lookup_locked(key, true);
      if (hit) return *hit;

      auto it = flights_.find(key);
      if (it != flights_.end()) {
        // Another caller is already loading this key; wait for its result.
        flight = it->second;
        flight->cv.wait(lock, [&] { return flight->done; });
        if (flight->failed) return flight->error;
        return flight->value;
      }
      flight = std::make_shared<Flight>();
      flights_[key] = flight;
    }

    Result<std::string> loaded = loader();
    {
      std::lock_guard lock(m_);
      if (loaded.ok()) {
        put_locked(key, loaded.value(), cls);
        flight->value = loaded.value();
      } else {
        flight->failed = true;
        flight->error = loaded.error();
      }
      flight->done = true;
      flights_.erase(key);
    }
    flight->cv.notify_all();
    return loaded;
  }

  // Returns true when the key was present.
  bool invalidate(const std::string& key) {
    std::lock_guard lock(m_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return false;
    lru_.erase(it->second.lru_it);
    entries_.erase(it);
    return true;
  }

  CacheStats stats() const {
    CacheStats s;
    s.hits = hits_.load();
    s.misses = misses_.load();
    s.evictions = evictions_.load();
    return s;
  }

  size_t size() const {
    std::lock_guard lock(m_);
    return entries_.size();
  }

 private:
  struct Entry {
    std::string value;
    int64_t stored_at_ns = 0;
    int64_t ttl_ns = 0;
    std::list<std::string>::iterator lru_it;
  };

  struct Flight {
    std::condition_variable cv;
    bool done = false;
    bool failed = false;
    std::string value;
    Error error;
  };

  std::optional<std::string> lookup_locked(const std::string& key,
                                           bool count) {
    auto it = entries_.find(key);
    int64_t now = clock_->now_ns();
    if (it != entries_.end() && now - it->second.stored_at_ns <= it->second.ttl_ns) {
      lru_.splice(lru_.begin(), lru_, it->second.lru_it);
      if (count) hits_.fetch_add(1);
      return it->second.value;
    }
    if (it != entries_.end()) {
      // Expired: drop it so it is never served again without a fresh store.
      lru_.erase(it->second.lru_it);
      entries_.erase(it);
    }
    if (count) misses_.fetch_add(1);
    return std::nullopt;
  }

  void put_locked(const std::string& key, std::string value, TtlClass cls) {
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      it->second.value = std::move(value);
      it->second.stored_at_ns = clock_->now_ns();
      it->second.ttl_ns = flightdeck::ttl_ns(cls);
      lru_.splice(lru_.begin(), lru_, it->second.lru_it);
      return;
    }
    if (entries_.size() >= capacity_ && !lru_.empty()) {
      const std::string& victim = lru_.back();
      entries_.erase(victim);
      lru_.pop_back();
      evictions_.fetch_add(1);
    }
    lru_.push_front(key);
    Entry e;
    e.value = std::move(value);
    e.stored_at_ns = clock_->now_ns();
    e.ttl_ns = flightdeck::ttl_ns(cls);
    e.lru_it = lru_.begin();
    entries_[key] = std::move(e);
  }

  Clock* clock_;
  size_t capacity_;
  mutable std::mutex m_;
  std::unordered_map<std::string, Entry> entries_;
  std::list<std::string> lru_;
  std::map<std::string, std::shared_ptr<Flight>> flights_;
  std::atomic<uint64_t> hits_{0}, misses_{0}, evictions_{0};
};

}  // namespace flightdeck
