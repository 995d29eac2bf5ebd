#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "flightdeck/broker.hpp"
#include "flightdeck/cache.hpp"
#include "flightdeck/clock.hpp"
#include "flightdeck/domain.hpp"
#include "flightdeck/error.hpp"
#include "flightdeck/faults.hpp"
#include "flightdeck/metrics.hpp"
#include "flightdeck/store.hpp"
#include "flightdeck/txn.hpp"

namespace flightdeck {

/// Flight inventory. Authoritative seat counts live in the transactional
/// store; the static catalog is mirrored into the document store for search.
class FlightService {
 public:
  FlightService(Clock* clock, Broker* broker, TtlCache* cache, int txn_retries)
      : clock_(clock), broker_(broker), cache_(cache), retries_(txn_retries) {}

  void add_flight(const Flight& f) {
    TxnHandle h = inventory_.begin();
    inventory_.set(h, inventory_key(f.flight_id), f.to_json().dump());
    inventory_.commit(h);
    Json doc = f.to_json();
    doc.erase("seats_available");  // volatile field stays in the txn store
    catalog_.put("flights", f.flight_id, doc);
  }

  Result<Flight> get_flight(const std::string& flight_id) const {
    auto raw = inventory_.read(inventory_key(flight_id));
    if (!raw) return Error{Errc::not_found, "unknown flight: " + flight_id};
    return Flight::from_json(parse_json(*raw));
  }

  /// Cache-aside search. Results (including seat counts) are cached under the
  /// short TTL class, so availability may be stale by at most that TTL.
  Result<std::string> search_flights(const std::string& origin,
                                     const std::string& destination,
                                     const std::string& date) {
    std::string key = "search:" + origin + ":" + destination + ":" + date;
    return cache_->get_or_load(
        key,
        [&]() -> Result<std::string> {
          if (offline_) return Error{Errc::service_failure, "flight service offline"};
          store_loads_.fetch_add(1);
          Json filter;
          filter["origin"] = origin;
          filter["destination"] = destination;
          filter["date"] = date;
          Json out = Json::array();
          for (const auto& doc : catalog_.query("flights", filter)) {
            auto f = get_flight(doc.value("flight_id", std::string{}));
            if (f.ok()) out.push_back(f.value().to_json());
          }
          return out.dump();
        },
        TtlClass::kShort);
  }

  Result<std::string> get_availability(const std::string& flight_id) {
    return cache_->get_or_load(
        availability_key(flight_id),
        [&]() -> Result<std::string> {
          auto f = get_flight(flight_id);
          if (!f.ok()) return f.error();
          Json j;
          j["flight_id"] = flight_id;
          j["seats_available"] = f.value().seats_available;
          return j.dump();
        },
        TtlClass::kShort);
  }

  /// Atomic seat decrement; no partial effect on insufficient seats.
  Status reserve_seats(const std::string& flight_id, int32_t n) {
    if (n < 1) return make_error(Errc::invalid_argument, "n must be >= 1");
    Status s = with_txn(inventory_, retries_, [&](TxnHandle& h) -> Status {
      auto raw = inventory_.get(h, inventory_key(flight_id));
      if (!raw) return make_error(Errc::not_found, "unknown flight");
      Flight f = Flight::from_json(parse_json(*raw));
      if (f.seats_available < n) {
        return make_error(Errc::insufficient_seats, "insufficient seats");
      }
      f.seats_available -= n;
      inventory_.set(h, inventory_key(flight_id), f.to_json().dump());
      return {};
    });
    if (!s.ok()) return s;
    cache_->invalidate(availability_key(flight_id));
    Json payload;
    payload["flight_id"] = flight_id;
    payload["seats"] = n;
    payload["event"] = "seats.reserved";
    broker_->publish(kTopicInventory, flight_id, payload.dump());
    return {};
  }

  Status release_seats(const std::string& flight_id, int32_t n) {
    if (n < 1) return make_error(Errc::invalid_argument, "n must be >= 1");
    Status s = with_txn(inventory_, retries_, [&](TxnHandle& h) -> Status {
      auto raw = inventory_.get(h, inventory_key(flight_id));
      if (!raw) return make_error(Errc::not_found, "unknown flight");
      Flight f = Flight::from_json(parse_json(*raw));
      f.seats_available = std::min(f.capacity, f.seats_available + n);
      inventory_.set(h, inventory_key(flight_id), f.to_json().dump());
      return {};
    });
    if (!s.ok()) return s;
    cache_->invalidate(availability_key(flight_id));
    Json payload;
    payload["flight_id"] = flight_id;
    payload["seats"] = n;
    payload["event"] = "seats.released";
    broker_->publish(kTopicInventory, flight_id, payload.dump());
    return {};
  }

  std::vector<Flight> all_flights() const {
    std::vector<Flight> out;
    for (const auto& [key, value] : inventory_.read_prefix("flight:")) {
      out.push_back(Flight::from_json(parse_json(value)));
    }
    return out;
  }

  uint64_t store_load_count() const { return store_loads_.load(); }
  void set_offline(bool offline) { offline_ = offline; }

  TxnStore& inventory_store() { return inventory_; }
  const TxnStore& inventory_store() const { return inventory_; }
  DocumentStore& catalog_store() { return catalog_; }
  const DocumentStore& catalog_store() const { return catalog_; }

  static std::string availability_key(const std::string& flight_id) {
    return "avail:" + flight_id;
  }

 private:
  static std::string inventory_key(const std::string& flight_id) {
    return "flight:" + flight_id;
  }

  Clock* clock_;
  Broker* broker_;
  TtlCache* cache_;
  int retries_;
  TxnStore inventory_;
  DocumentStore catalog_;
  std::atomic<uint64_t> store_loads_{0};
  std::atomic<bool> offline_{false};
};

/// Charges and refunds. Charge failures are driven by the fault plan; a
/// refund of anything but a charged payment is an invalid state, and
/// refunding twice is a no-op.
class PaymentService {
 public:
  PaymentService(Clock* clock, Broker* broker, FaultPlan* faults,
                 MetricsHub* metrics, int txn_retries)
      : clock_(clock),
        broker_(broker),
        faults_(faults),
        metrics_(metrics),
        retries_(txn_retries) {}

  Result<Payment> charge(const std::string& booking_id, int64_t amount) {
    if (offline_) return Error{Errc::service_failure, "payment service offline"};
    metrics_->payment_attempts.fetch_add(1);
    bool fail = faults_->draw_payment_failure();
    Payment p;
    {
      std::lock_guard lock(id_m_);
      p.payment_id = "pay-" + std::to_string(next_id_++);
    }
    p.booking_id = booking_id;
    p.amount = amount;
    p.status = fail ? PaymentStatus::failed : PaymentStatus::charged;
    Status s = with_txn(store_, retries_, [&](TxnHandle& h) -> Status {
      store_.set(h, payment_key(p.payment_id), p.to_json().dump());
      store_.set(h, booking_index_key(booking_id), p.payment_id);
      return {};
    });
    if (!s.ok()) return s.error();
    if (fail) {
      metrics_->payment_failures.fetch_add(1);
      publish_event(p, "payment.failed");
    } else {
      publish_event(p, "payment.charged");
    }
    return p;
  }

  Result<Payment> refund(const std::string& payment_id) {
    Payment result;
    Status s = with_txn(store_, retries_, [&](TxnHandle& h) -> Status {
      auto raw = store_.get(h, payment_key(payment_id));
      if (!raw) return make_error(Errc::not_found, "unknown payment");
      Payment p = Payment::from_json(parse_json(*raw));
      if (p.status == PaymentStatus::refunded) {
        result = p;  // idempotent
        return {};
      }
      if (p.status != PaymentStatus::charged) {
        return make_error(Errc::invalid_state, "refund requires a charge");
      }
      p.status = PaymentStatus::refunded;
      store_.set(h, payment_key(payment_id), p.to_json().dump());
      result = p;
      return {};
    });
    if (!s.ok()) return s.error();
    if (result.status == PaymentStatus::refunded) {
      publish_event(result, "payment.refunded");
    }
    return result;
  }

  Result<Payment> get_payment(const std::string& payment_id) const {
    if (offline_) return Error{Errc::service_failure, "payment service offline"};
    auto raw = store_.read(payment_key(payment_id));
    if (!raw) return Error{Errc::not_found, "unknown payment"};
    return Payment::from_json(parse_json(*raw));
  }

  std::optional<Payment> payment_for_booking(
      const std::string& booking_id) const {
    auto id = store_.read(booking_index_key(booking_id));
    if (!id) return std::nullopt;
    auto raw = store_.read(payment_key(*id));
    if (!raw) return std::nullopt;
    return Payment::from_json(parse_json(*raw));
  }

  void set_offline(bool offline) { offline_ = offline; }
  TxnStore& payment_store() { return store_; }
  const TxnStore& payment_store() const { return store_; }

 private:
  void publish_event(const Payment& p, const std::string& event) {
    Json payload = p.to_json();
    payload["event"] = event;
    broker_->publish(kTopicPayments, p.booking_id, payload.dump());
  }

  static std::string payment_key(const std::string& id) {
    return "payment:" + id;
  }
  static std::string booking_index_key(const std::string& booking_id) {
    return "payment_by_booking:" + booking_id;
  }

  Clock* clock_;
  Broker* broker_;
  FaultPlan* faults_;
  MetricsHub* metrics_;
  int retries_;
  TxnStore store_;
  std::mutex id_m_;
  uint64_t next_id_ = 1;
  std::atomic<bool> offline_{false};
};

/// User profiles in the document store, read through the long-TTL cache.
/// Credentials are never stored here; the token service owns those.
class ProfileService {
 public:
  ProfileService(Clock* clock, TtlCache* cache)
      : clock_(clock), cache_(cache) {}

  void put_profile(const Json& profile) {
    std::string user_id = profile.value("user_id", std::string{});
    store_.put("users", user_id, profile);
    cache_->invalidate(cache_key(user_id));
  }

  Result<Json> get_user(const std::string& user_id) {
    if (offline_) return Error{Errc::service_failure, "profile service offline"};
    auto loaded = cache_->get_or_load(
        cache_key(user_id),
        [&]() -> Result<std::string> {
          auto doc = store_.get("users", user_id);
          if (!doc) return Error{Errc::not_found, "unknown user: " + user_id};
          return doc->dump();
        },
        TtlClass::kLong);
    if (!loaded.ok()) return loaded.error();
    return parse_json(loaded.value());
  }

  Result<Json> update_user(const std::string& user_id, const Json& fields) {
    auto doc = store_.get("users", user_id);
    if (!doc) return Error{Errc::not_found, "unknown user: " + user_id};
    Json updated = *doc;
    for (auto it = fields.begin(); it != fields.end(); ++it) {
      if (it.key() == "user_id") continue;
      updated[it.key()] = it.value();
    }
    store_.put("users", user_id, updated);
    cache_->invalidate(cache_key(user_id));
    return updated;
  }

  void set_offline(bool offline) { offline_ = offline; }
  DocumentStore& profile_store() { return store_; }
  const DocumentStore& profile_store() const { return store_; }

 private:
  static std::string cache_key(const std::string& user_id) {
    return "user:" + user_id;
  }

  Clock* clock_;
  TtlCache* cache_;
  DocumentStore store_;
  std::atomic<bool> offline_{false};
};

struct BookingResult {
  enum class Kind { confirmed, rejected, compensated };
  Kind kind = Kind::confirmed;
  std::string booking_id;
  std::string reason;
};

/// Owns booking records and drives the booking saga:
///   reserve seats -> charge payment -> confirm booking
/// with compensations release seats / refund payment running in reverse on
/// failure. Booking ids derive from the request correlation id, so a client
/// retry lands on the same booking instead of double-booking.
class BookingService {
 public:
  BookingService(Clock* clock, Broker* broker, FlightService* flights,
                 PaymentService* payments, ProfileService* profiles,
                 FaultPlan* faults, MetricsHub* metrics, int txn_retries)
      : clock_(clock),
        broker_(broker),
        flights_(flights),
        payments_(payments),
        profiles_(profiles),
        faults_(faults),
        metrics_(metrics),
        retries_(txn_retries),
        saga_(clock, [this](const std::string& saga_id, const JournalEntry& e) {
          persist_journal_entry(saga_id, e);
        }) {}

  Result<BookingResult> create_booking(const std::string& user_id,
                                       const std::string& flight_id,
                                       int32_t seats,
                                       const std::string& correlation_id) {
    if (seats < 1) {
      return Error{Errc::invalid_argument, "seats must be >= 1"};
    }
    std::string booking_id = "bk-" + correlation_id;

    // Idempotency: a retry with the same correlation id sees the stored
    // outcome instead of creating a second booking.
    if (auto existing = get_booking(booking_id); existing.ok()) {
      return result_for(existing.value());
    }

    auto flight = flights_->get_flight(flight_id);
    if (!flight.ok()) {
      return BookingResult{BookingResult::Kind::rejected, booking_id,
                           "unknown flight"};
    }

    Booking b;
    b.booking_id = booking_id;
    b.user_id = user_id;
    b.flight_id = flight_id;
    b.seats = seats;
    b.status = BookingStatus::pending;
    b.created_ts = clock_->now_unix_s();
    Status ins = with_txn(store_, retries_, [&](TxnHandle& h) -> Status {
      if (store_.get(h, booking_key(booking_id))) {
        return make_error(Errc::already_exists, "booking exists");
      }
      store_.set(h, booking_key(booking_id), b.to_json().dump());
      append_user_index(h, user_id, booking_id);
      return {};
    });
    if (!ins.ok() && ins.code() == Errc::already_exists) {
      auto existing = get_booking(booking_id);
      if (existing.ok()) return result_for(existing.value());
    }
    if (!ins.ok()) return ins.error();

    Json ctx;
    ctx["booking_id"] = booking_id;
    ctx["user_id"] = user_id;
    ctx["flight_id"] = flight_id;
    ctx["seats"] = seats;
    ctx["correlation_id"] = correlation_id;

    SagaOutcome outcome = saga_.execute(booking_id, booking_steps(), ctx);
    return finish(outcome, ctx);
  }

  Result<Booking> get_booking(const std::string& booking_id) const {
    auto raw = store_.read(booking_key(booking_id));
    if (!raw) return Error{Errc::not_found, "unknown booking"};
    return Booking::from_json(parse_json(*raw));
  }

  std::vector<Booking> bookings_for_user(const std::string& user_id) const {
    std::vector<Booking> out;
    auto ids = store_.read(user_index_key(user_id));
    if (!ids) return out;
    for (const auto& id : parse_json(*ids)) {
      auto b = get_booking(id.get<std::string>());
      if (b.ok()) out.push_back(b.value());
    }
    return out;
  }

  std::vector<Booking> all_bookings() const {
    std::vector<Booking> out;
    for (const auto& [key, value] : store_.read_prefix("booking:")) {
      out.push_back(Booking::from_json(parse_json(value)));
    }
    return out;
  }

  std::vector<JournalEntry> journal_for(const std::string& booking_id) const {
    std::vector<JournalEntry> out;
    for (const auto& [key, value] :
         store_.read_prefix("saga:" + booking_id + ":")) {
      Json j = parse_json(value);
      JournalEntry e;
      e.seq = j.value("seq", uint64_t{0});
      e.step = j.value("step_name", std::string{});
      e.event = saga_event_from(j.value("event", std::string{}))
                    .value_or(SagaEvent::action_ok);
      e.ts_ns = j.value("ts", int64_t{0});
      out.push_back(e);
    }
    std::sort(out.begin(), out.end(),
              [](const JournalEntry& a, const JournalEntry& b) {
                return a.seq < b.seq;
              });
    return out;
  }

  void dump_journals(std::ostream& os) const {
    for (const auto& [key, value] : store_.read_prefix("saga:")) {
      os << value << "\n";
    }
  }

  uint64_t stuck_count() const { return saga_.stuck_count(); }
  TxnStore& booking_store() { return store_; }
  const TxnStore& booking_store() const { return store_; }

 private:
  std::vector<SagaStep> booking_steps() {
    std::vector<SagaStep> steps(3);
    steps[0].name = "reserve-seats";
    steps[0].action = [this](Json& ctx) -> StepResult {
      Status s = flights_->reserve_seats(ctx["flight_id"], ctx["seats"]);
      if (!s.ok()) return StepResult::failure(s.error().message);
      Json payload;
      payload["event"] = "booking.created";
      payload["booking_id"] = ctx["booking_id"];
      payload["user_id"] = ctx["user_id"];
      payload["flight_id"] = ctx["flight_id"];
      payload["seats"] = ctx["seats"];
      broker_->publish(kTopicBookings, ctx["booking_id"], payload.dump(),
                       ctx.value("correlation_id", std::string{}));
      return StepResult::success();
    };
    steps[0].compensation = [this](Json& ctx) {
      flights_->release_seats(ctx["flight_id"], ctx["seats"]);
    };

    steps[1].name = "charge-payment";
    steps[1].action = [this](Json& ctx) -> StepResult {
      auto flight = flights_->get_flight(ctx["flight_id"]);
      if (!flight.ok()) return StepResult::failure("flight vanished");
      int64_t amount = flight.value().price * int64_t(ctx["seats"].get<int32_t>());
      auto p = payments_->charge(ctx["booking_id"], amount);
      if (!p.ok()) return StepResult::failure(p.error().message);
      if (p.value().status != PaymentStatus::charged) {
        return StepResult::failure("payment failed");
      }
      ctx["payment_id"] = p.value().payment_id;
      return StepResult::success();
    };
    steps[1].compensation = [this](Json& ctx) {
      if (ctx.contains("payment_id")) {
        payments_->refund(ctx["payment_id"]);
      }
    };

    steps[2].name = "confirm-booking";
    steps[2].action = [this](Json& ctx) -> StepResult {
      Status s = set_status(ctx["booking_id"], BookingStatus::confirmed,
                            ctx.value("payment_id", std::string{}), "");
      if (!s.ok()) return StepResult::failure(s.error().message);
      publish_booking_event(ctx, "booking.confirmed");
      enqueue_notification(ctx);
      return StepResult::success();
    };
    steps[2].compensation = [this](Json& ctx) {
      set_status(ctx["booking_id"], BookingStatus::cancelled, "",
                 "confirmation rolled back");
    };
    return steps;
  }

  Result<BookingResult> finish(const SagaOutcome& outcome, Json& ctx) {
    std::string booking_id = ctx["booking_id"];
    switch (outcome.kind) {
      case SagaOutcome::Kind::completed:
        metrics_->bookings_confirmed.fetch_add(1);
        return BookingResult{BookingResult::Kind::confirmed, booking_id, ""};
      case SagaOutcome::Kind::compensated: {
        if (outcome.failed_step == "reserve-seats") {
          // Nothing succeeded, so nothing was compensated and no events were
          // published: this is a plain rejection.
          set_status(booking_id, BookingStatus::cancelled, "", outcome.reason);
          metrics_->bookings_rejected.fetch_add(1);
          return BookingResult{BookingResult::Kind::rejected, booking_id,
                               outcome.reason};
        }
        set_status(booking_id, BookingStatus::compensated,
                   ctx.value("payment_id", std::string{}), outcome.reason);
        publish_booking_event(ctx, "booking.compensated");
        metrics_->bookings_compensated.fetch_add(1);
        return BookingResult{BookingResult::Kind::compensated, booking_id,
                             outcome.reason};
      }
      case SagaOutcome::Kind::stuck:
        // Surfaces as a 5xx at the gateway, where error accounting happens.
        return Error{Errc::stuck_compensating, outcome.reason};
      case SagaOutcome::Kind::crashed:
        return Error{Errc::service_failure, "saga interrupted"};
    }
    return Error{Errc::service_failure, "unreachable"};
  }

  Result<BookingResult> result_for(const Booking& b) {
    switch (b.status) {
      case BookingStatus::confirmed:
        return BookingResult{BookingResult::Kind::confirmed, b.booking_id, ""};
      case BookingStatus::cancelled:
        return BookingResult{BookingResult::Kind::rejected, b.booking_id,
                             b.reason};
      case BookingStatus::compensated:
        return BookingResult{BookingResult::Kind::compensated, b.booking_id,
                             b.reason};
      case BookingStatus::pending:
        return Error{Errc::conflict, "booking in progress"};
    }
    return Error{Errc::service_failure, "unreachable"};
  }

  Status set_status(const std::string& booking_id, BookingStatus status,
                    const std::string& payment_id, const std::string& reason) {
    return with_txn(store_, retries_, [&](TxnHandle& h) -> Status {
      auto raw = store_.get(h, booking_key(booking_id));
      if (!raw) return make_error(Errc::not_found, "unknown booking");
      Booking b = Booking::from_json(parse_json(*raw));
      b.status = status;
      if (!payment_id.empty()) b.payment_id = payment_id;
      if (!reason.empty()) b.reason = reason;
      store_.set(h, booking_key(booking_id), b.to_json().dump());
      return {};
    });
  }

  void publish_booking_event(const Json& ctx, const std::string& event) {
    Json payload;
    payload["event"] = event;
    payload["booking_id"] = ctx["booking_id"];
    payload["user_id"] = ctx["user_id"];
    payload["flight_id"] = ctx["flight_id"];
    payload["seats"] = ctx["seats"];
    if (ctx.contains("payment_id")) payload["payment_id"] = ctx["payment_id"];
    broker_->publish(kTopicBookings, ctx["booking_id"], payload.dump(),
                     ctx.value("correlation_id", std::string{}));
  }

  void enqueue_notification(const Json& ctx) {
    // Delivery channel follows the user's notification preference.
    std::string kind = "email";
    auto profile = profiles_->get_user(ctx["user_id"]);
    if (profile.ok()) {
      kind = profile.value().value("preferences", Json::object())
                 .value("notify", "email");
    }
    Json msg;
    msg["booking_id"] = ctx["booking_id"];
    msg["kind"] = kind;
    const char* queue = kind == "sms" ? kQueueSms : kQueueEmail;
    broker_->enqueue(queue, msg.dump());
    if (faults_->draw_duplicate_delivery()) {
      broker_->enqueue(queue, msg.dump());  // injected duplicate
    }
  }

  void persist_journal_entry(const std::string& saga_id,
                             const JournalEntry& e) {
    with_txn(store_, retries_, [&](TxnHandle& h) -> Status {
      store_.set(h, "saga:" + saga_id + ":" + seq_key(e.seq),
                 journal_entry_json(saga_id, e).dump());
      return {};
    });
  }

  void append_user_index(TxnHandle& h, const std::string& user_id,
                         const std::string& booking_id) {
    Json ids = Json::array();
    if (auto raw = store_.get(h, user_index_key(user_id))) {
      ids = parse_json(*raw);
    }
    ids.push_back(booking_id);
    store_.set(h, user_index_key(user_id), ids.dump());
  }

  static std::string booking_key(const std::string& id) {
    return "booking:" + id;
  }
  static std::string user_index_key(const std::string& user_id) {
    return "user_bookings:" + user_id;
  }
  static std::string seq_key(uint64_t seq) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06llu", (unsigned long long)seq);
    return buf;
  }

  Clock* clock_;
  Broker* broker_;
  FlightService* flights_;
  PaymentService* payments_;
  ProfileService* profiles_;
  FaultPlan* faults_;
  MetricsHub* metrics_;
  int retries_;
  TxnStore store_;
  SagaOrchestrator saga_;
};

/// Queue consumer that turns confirmed-booking messages into notification
/// records. Writes are idempotent on (booking, kind), so redeliveries and
/// injected duplicates collapse into one record.
class NotificationService {
 public:
  NotificationService(Clock* clock, Broker* broker, FaultPlan* faults,
                      MetricsHub* metrics,
                      int64_t visibility_timeout_ns = 30 * kNsPerSec)
      : clock_(clock),
        broker_(broker),
        faults_(faults),
        metrics_(metrics),
        visibility_ns_(visibility_timeout_ns) {}

  // Processes up to `max` messages from one queue; returns processed count.
  size_t pump(const std::string& queue, size_t max) {
    if (!faults_->consumer_online(clock_->now_ns())) return 0;
    size_t n = 0;
    for (; n < max; ++n) {
      auto msg = broker_->receive(queue, visibility_ns_);
      if (!msg) break;
      if (!handle(queue, *msg)) break;
    }
    return n;
  }

  size_t pump_all(size_t max) {
    return pump(kQueueEmail, max) + pump(kQueueSms, max);
  }

  size_t record_count() const { return store_.size("notifications"); }

  std::vector<Json> records_for(const std::string& booking_id) const {
    Json filter;
    filter["booking_id"] = booking_id;
    return store_.query("notifications", filter);
  }

  DocumentStore& notification_store() { return store_; }
  const DocumentStore& notification_store() const { return store_; }
  void set_store_failing(bool failing) { store_failing_ = failing; }

 private:
  bool handle(const std::string& queue, const QueueMessage& msg) {
    if (store_failing_) {
      broker_->nack(queue, msg.delivery_tag);
      return false;
    }
    Json body = parse_json(msg.payload);
    std::string booking_id = body.value("booking_id", std::string{});
    std::string kind = body.value("kind", std::string{"email"});
    std::string doc_id = kind + ":" + booking_id;
    if (!store_.get("notifications", doc_id)) {
      Json rec;
      rec["notification_id"] = doc_id;
      rec["kind"] = kind;
      rec["booking_id"] = booking_id;
      rec["sent_ts"] = clock_->now_unix_s();
      store_.put("notifications", doc_id, rec);
      metrics_->notifications_written.fetch_add(1);
    }
    broker_->ack(queue, msg.delivery_tag);
    return true;
  }

  Clock* clock_;
  Broker* broker_;
  FaultPlan* faults_;
  MetricsHub* metrics_;
  int64_t visibility_ns_;
  DocumentStore store_;
  std::atomic<bool> store_failing_{false};
};

}  // namespace flightdeck
