#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "flightdeck/auth.hpp"
#include "flightdeck/broker.hpp"
#include "flightdeck/cache.hpp"
#include "flightdeck/clock.hpp"
#include "flightdeck/faults.hpp"
#include "flightdeck/fixtures.hpp"
#include "flightdeck/gateway.hpp"
#include "flightdeck/metrics.hpp"
#include "flightdeck/projector.hpp"
#include "flightdeck/services.hpp"
#include "flightdeck/trips.hpp"

namespace flightdeck {

struct TestbedConfig {
  uint64_t seed = 42;
  FixtureParams fixtures;
  FaultConfig faults;
  size_t cache_capacity = 100'000;
  uint32_t topic_partitions = 4;
  int64_t queue_visibility_ns = 30 * kNsPerSec;
  double rate_limit_capacity = 100;
  double rate_limit_rate = 100;
  int txn_retries = 10;
  std::string auth_secret = "flightdeck-shared-secret";
};

/// The whole in-process cluster: broker, cache, token service, the five
/// domain services, the read-model projector and the gateway, wired exactly
/// as the HTTP deployment would be. Everything reads the injected clock.
class Testbed {
 public:
  Testbed(Clock* clock, const TestbedConfig& config)
      : config_(config),
        clock_(clock),
        metrics_(std::make_unique<MetricsHub>()),
        broker_(clock),
        cache_(clock, config.cache_capacity),
        faults_(config.faults, config.seed, clock->now_ns()),
        auth_(clock, config.auth_secret),
        flights_(clock, &broker_, &cache_, config.txn_retries),
        payments_(clock, &broker_, &faults_, metrics_.get(),
                  config.txn_retries),
        profiles_(clock, &cache_),
        bookings_(clock, &broker_, &flights_, &payments_, &profiles_,
                  &faults_, metrics_.get(), config.txn_retries),
        notifications_(clock, &broker_, &faults_, metrics_.get(),
                       config.queue_visibility_ns),
        projector_(clock, &broker_, &faults_, metrics_.get()),
        trips_(&bookings_, &flights_, &payments_, &profiles_),
        gateway_(clock, &auth_, config.rate_limit_capacity,
                 config.rate_limit_rate) {
    broker_.create_topic(kTopicBookings, config.topic_partitions);
    broker_.create_topic(kTopicPayments, config.topic_partitions);
    broker_.create_topic(kTopicInventory, config.topic_partitions);
    load_fixtures();
    register_routes();
  }

  Clock& clock() { return *clock_; }
  MetricsHub& metrics() { return *metrics_; }
  Broker& broker() { return broker_; }
  TtlCache& cache() { return cache_; }
  FaultPlan& faults() { return faults_; }
  TokenService& auth() { return auth_; }
  FlightService& flights() { return flights_; }
  PaymentService& payments() { return payments_; }
  ProfileService& profiles() { return profiles_; }
  BookingService& bookings() { return bookings_; }
  NotificationService& notifications() { return notifications_; }
  ReadModelProjector& projector() { return projector_; }
  TripAggregator& trips() { return trips_; }
  Gateway& gateway() { return gateway_; }
  const TestbedConfig& config() const { return config_; }
  const FixtureSet& fixture_set() const { return fixture_set_; }

  /// Digest of every service-owned store, for zero-effect assertions.
  std::map<std::string, std::string> store_digests() const {
    return {
        {"flight_inventory", flights_.inventory_store().digest()},
        {"flight_catalog", flights_.catalog_store().digest()},
        {"bookings", bookings_.booking_store().digest()},
        {"payments", payments_.payment_store().digest()},
        {"profiles", profiles_.profile_store().digest()},
        {"notifications", notifications_.notification_store().digest()},
    };
  }

  /// Drives consumers until no undelivered work remains. Virtual-clock mode
  /// advances time between pump rounds so redeliveries and restart windows
  /// play out. Returns false if the system failed to drain within `budget_ns`.
  bool quiesce(int64_t budget_ns = 120 * kNsPerSec) {
    int64_t deadline = clock_->now_ns() + budget_ns;
    while (clock_->now_ns() < deadline) {
      size_t moved = projector_.pump(1024);
      moved += notifications_.pump_all(1024);
      if (drained()) return true;
      if (moved == 0) {
        if (clock_->is_virtual()) {
          static_cast<VirtualClock*>(clock_)->advance_ns(50 * kNsPerMs);
        } else {
          clock_->sleep_for_ns(kNsPerMs);
        }
      }
    }
    return drained();
  }

  /// Waits for consumers running on their own threads to drain the system
  /// without pumping from this thread.
  bool wait_drained(int64_t budget_ns = 30 * kNsPerSec) {
    int64_t deadline = clock_->now_ns() + budget_ns;
    while (clock_->now_ns() < deadline) {
      if (drained()) return true;
      clock_->sleep_for_ns(kNsPerMs);
    }
    return drained();
  }

  bool drained() const {
    return projector_.drained() && broker_.queue_depth(kQueueEmail) == 0 &&
           broker_.queue_depth(kQueueSms) == 0;
  }

 private:
  void load_fixtures() {
    fixture_set_ = generate_fixtures(config_.fixtures, config_.seed);
    for (const auto& f : fixture_set_.flights) flights_.add_flight(f);
    for (const auto& u : fixture_set_.users) {
      std::set<std::string> scopes(u.scopes.begin(), u.scopes.end());
      auth_.add_user(u.user_id, u.salt,
                     TokenService::password_hash(u.salt, u.password),
                     std::move(scopes));
      profiles_.put_profile(u.profile);
    }
  }

  void register_routes() {
    gateway_.add_route(
        "POST", "/v1/auth/token", std::nullopt,
        [this](const RequestContext& ctx) { return handle_token(ctx); });

    gateway_.add_route(
        "GET", "/v1/flights", std::nullopt,
        [this](const RequestContext& ctx) -> Result<HandlerReply> {
          const auto& q = ctx.request->query;
          auto get = [&](const char* k) {
            auto it = q.find(k);
            return it == q.end() ? std::string{} : it->second;
          };
          auto found = flights_.search_flights(get("origin"),
                                               get("destination"), get("date"));
          if (!found.ok()) return found.error();
          Json body;
          body["flights"] = parse_json(found.value());
          return HandlerReply{200, body};
        });

    gateway_.add_route(
        "POST", "/v1/bookings", "booking.write",
        [this](const RequestContext& ctx) -> Result<HandlerReply> {
          const Json& b = ctx.request->body;
          if (!b.is_object() || !b.contains("flight_id")) {
            return Error{Errc::invalid_argument, "flight_id required"};
          }
          auto result = bookings_.create_booking(
              ctx.claims->sub, b["flight_id"], b.value("seats", int32_t{1}),
              ctx.correlation_id);
          if (!result.ok()) return result.error();
          const BookingResult& r = result.value();
          Json body;
          body["booking_id"] = r.booking_id;
          body["reason"] = r.reason;
          switch (r.kind) {
            case BookingResult::Kind::confirmed:
              body["result"] = "confirmed";
              return HandlerReply{201, body};
            case BookingResult::Kind::rejected:
              body["result"] = "rejected";
              return HandlerReply{200, body};
            case BookingResult::Kind::compensated:
              body["result"] = "compensated";
              return HandlerReply{200, body};
          }
          return Error{Errc::service_failure, "unreachable"};
        });

    gateway_.add_route(
        "GET", "/v1/bookings/{id}", "booking.read",
        [this](const RequestContext& ctx) -> Result<HandlerReply> {
          auto b = bookings_.get_booking(ctx.path_params.at("id"));
          if (!b.ok()) return b.error();
          if (b.value().user_id != ctx.claims->sub &&
              !ctx.claims->has_scope("admin")) {
            return Error{Errc::insufficient_scope, "not your booking"};
          }
          return HandlerReply{200, b.value().to_json()};
        });

    gateway_.add_route(
        "GET", "/v1/payments/{id}", "payment.read",
        [this](const RequestContext& ctx) -> Result<HandlerReply> {
          auto p = payments_.get_payment(ctx.path_params.at("id"));
          if (!p.ok()) return p.error();
          return HandlerReply{200, p.value().to_json()};
        });

    gateway_.add_route(
        "GET", "/v1/users/{id}", "profile.read",
        [this](const RequestContext& ctx) -> Result<HandlerReply> {
          if (Status s = require_self_or_admin(ctx, "id"); !s.ok()) {
            return s.error();
          }
          auto u = profiles_.get_user(ctx.path_params.at("id"));
          if (!u.ok()) return u.error();
          return HandlerReply{200, u.value()};
        });

    gateway_.add_route(
        "PUT", "/v1/users/{id}", "profile.write",
        [this](const RequestContext& ctx) -> Result<HandlerReply> {
          if (Status s = require_self_or_admin(ctx, "id"); !s.ok()) {
            return s.error();
          }
          auto u = profiles_.update_user(ctx.path_params.at("id"),
                                         ctx.request->body);
          if (!u.ok()) return u.error();
          return HandlerReply{200, u.value()};
        });

    gateway_.add_route(
        "GET", "/v1/trips/{userId}", "profile.read",
        [this](const RequestContext& ctx) -> Result<HandlerReply> {
          auto t = trips_.get_trip(ctx.path_params.at("userId"), *ctx.claims);
          if (!t.ok()) return t.error();
          return HandlerReply{200, t.value()};
        });

    gateway_.add_route(
        "POST", "/v1/trips/{userId}", "profile.read",
        [this](const RequestContext& ctx) -> Result<HandlerReply> {
          Json selection = ctx.request->body.is_object()
                               ? ctx.request->body.value("selection",
                                                         Json::object())
                               : Json::object();
          auto t = trips_.aggregate(ctx.path_params.at("userId"), selection,
                                    *ctx.claims);
          if (!t.ok()) return t.error();
          return HandlerReply{200, t.value()};
        });
  }

  Result<HandlerReply> handle_token(const RequestContext& ctx) {
    const Json& b = ctx.request->body;
    if (!b.is_object()) {
      return Error{Errc::invalid_argument, "JSON body required"};
    }
    std::string grant = b.value("grant", std::string{"password"});
    Result<IssuedTokens> issued = [&]() -> Result<IssuedTokens> {
      if (grant == "password") {
        std::vector<std::string> scopes;
        for (const auto& s : b.value("scopes", Json::array())) {
          scopes.push_back(s.get<std::string>());
        }
        return auth_.issue(b.value("user", std::string{}),
                           b.value("password", std::string{}), scopes);
      }
      if (grant == "refresh") {
        return auth_.refresh(b.value("refresh_token", std::string{}));
      }
      return Error{Errc::invalid_argument, "unsupported grant: " + grant};
    }();
    if (!issued.ok()) return issued.error();
    Json body;
    body["access_token"] = issued.value().access_token;
    body["token_type"] = "Bearer";
    body["expires_in"] = issued.value().expires_in;
    body["refresh_token"] = issued.value().refresh_token;
    return HandlerReply{200, body};
  }

  Status require_self_or_admin(const RequestContext& ctx,
                               const char* param) const {
    if (ctx.path_params.at(param) != ctx.claims->sub &&
        !ctx.claims->has_scope("admin")) {
      return make_error(Errc::insufficient_scope, "not authorized");
    }
    return {};
  }

  TestbedConfig config_;
  Clock* clock_;
  std::unique_ptr<MetricsHub> metrics_;
  Broker broker_;
  TtlCache cache_;
  FaultPlan faults_;
  TokenService auth_;
  FlightService flights_;
  PaymentService payments_;
  ProfileService profiles_;
  BookingService bookings_;
  NotificationService notifications_;
  ReadModelProjector projector_;
  TripAggregator trips_;
  Gateway gateway_;
  FixtureSet fixture_set_;
};

}  // namespace flightdeck
