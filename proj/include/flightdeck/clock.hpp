#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <thread>

namespace flightdeck {

inline constexpr int64_t kNsPerUs = 1'000;
inline constexpr int64_t kNsPerMs = 1'000'000;
inline constexpr int64_t kNsPerSec = 1'000'000'000;

inline constexpr int64_t ms_to_ns(int64_t ms) { return ms * kNsPerMs; }
inline constexpr int64_t sec_to_ns(int64_t s) { return s * kNsPerSec; }

/// Injected time source. Every expiry, timeout, redelivery and timestamp in
/// the system reads one of these; swapping in a VirtualClock makes all of
/// that behavior deterministic.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual int64_t now_ns() = 0;
  virtual void sleep_for_ns(int64_t ns) = 0;
  virtual bool is_virtual() const = 0;

  int64_t now_unix_s() { return now_ns() / kNsPerSec; }
  double now_s() { return static_cast<double>(now_ns()) / kNsPerSec; }
};

/// Monotonic real-time clock anchored to the wall clock at construction, so
/// timestamps are both steady and meaningful as unix time.
class SystemClock final : public Clock {
 public:
  SystemClock() {
    auto wall = std::chrono::system_clock::now().time_since_epoch();
    wall_epoch_ns_ =
        std::chrono::duration_cast<std::chrono::nanoseconds>(wall).count();
    origin_ = std::chrono::steady_clock::now();
  }

  int64_t now_ns() override {
    auto d = std::chrono::steady_clock::now() - origin_;
    return wall_epoch_ns_ +
           std::chrono::duration_cast<std::chrono::nanoseconds>(d).count();
  }

  void sleep_for_ns(int64_t ns) override {
    if (ns > 0) std::this_thread::sleep_for(std::chrono::nanoseconds(ns));
  }

  bool is_virtual() const override { return false; }

 private:
  int64_t wall_epoch_ns_ = 0;
  std::chrono::steady_clock::time_point origin_;
};

/// Logical clock advanced explicitly by the test or the simulation scheduler.
/// Starts at a fixed epoch so runs with the same seed produce identical
/// timestamps. sleep_for_ns advances the clock instead of blocking.
class VirtualClock final : public Clock {
 public:
  // 2026-01-01T00:00:00Z
  static constexpr int64_t kDefaultEpochNs = 1'767'225'600LL * kNsPerSec;

  explicit VirtualClock(int64_t epoch_ns = kDefaultEpochNs) : now_(epoch_ns) {}

  int64_t now_ns() override { return now_.load(std::memory_order_relaxed); }

  void sleep_for_ns(int64_t ns) override {
    if (ns > 0) now_.fetch_add(ns, std::memory_order_relaxed);
  }

  bool is_virtual() const override { return true; }

  void advance_ns(int64_t ns) { now_.fetch_add(ns, std::memory_order_relaxed); }

  void advance_to_ns(int64_t t) {
    int64_t cur = now_.load(std::memory_order_relaxed);
    while (t > cur &&
           !now_.compare_exchange_weak(cur, t, std::memory_order_relaxed)) {
    }
  }

 private:
  std::atomic<int64_t> now_;
};

}  // namespace flightdeck
