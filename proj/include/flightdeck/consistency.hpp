#pragma once

#include <map>
#include <set>
#include <string>

#include "flightdeck/metrics.hpp"
#include "flightdeck/testbed.hpp"

namespace flightdeck {

/// Cross-service invariant checker. A booking is consistent when its
/// status/payment coupling holds and its flight's seat accounting balances;
/// at quiesce, notification completeness and the topic event trail are
/// checked as well. Mid-saga states show up as transient violations, which is
/// exactly what the in-flight sampling is there to observe.
class ConsistencyChecker {
 public:
  explicit ConsistencyChecker(Testbed* bed) : bed_(bed) {}

  ConsistencyReport check(bool at_quiesce) const {
    ConsistencyReport report;
    auto bookings = bed_->bookings().all_bookings();
    report.total_bookings = bookings.size();

    // Seat conservation per flight: capacity = available + seats held by
    // pending/confirmed bookings.
    std::map<std::string, int64_t> held;
    for (const auto& b : bookings) {
      if (b.status == BookingStatus::pending ||
          b.status == BookingStatus::confirmed) {
        held[b.flight_id] += b.seats;
      }
    }
    std::set<std::string> unbalanced;
    for (const auto& f : bed_->flights().all_flights()) {
      int64_t expect = held.count(f.flight_id) ? held[f.flight_id] : 0;
      if (int64_t(f.capacity) != int64_t(f.seats_available) + expect) {
        unbalanced.insert(f.flight_id);
      }
    }

    std::map<std::string, std::set<std::string>> events;
    if (at_quiesce) {
      for (const auto& rec : bed_->broker().read_topic(kTopicBookings)) {
        Json body = parse_json(rec.payload);
        events[body.value("booking_id", std::string{})].insert(
            body.value("event", std::string{}));
      }
    }

    for (const auto& b : bookings) {
      std::string violation = check_booking(b, unbalanced, events, at_quiesce);
      if (violation.empty()) {
        report.consistent_bookings += 1;
      } else {
        report.violations.push_back(
            ConsistencyViolation{b.booking_id, violation});
      }
    }
    return report;
  }

 private:
  std::string check_booking(
      const Booking& b, const std::set<std::string>& unbalanced,
      const std::map<std::string, std::set<std::string>>& events,
      bool at_quiesce) const {
    auto payment = bed_->payments().payment_for_booking(b.booking_id);

    switch (b.status) {
      case BookingStatus::confirmed:
        if (!payment || payment->status != PaymentStatus::charged) {
          return "confirmed booking without a charged payment";
        }
        break;
      case BookingStatus::compensated:
        if (!payment || (payment->status != PaymentStatus::refunded &&
                         payment->status != PaymentStatus::failed)) {
          return "compensated booking without refunded/failed payment";
        }
        break;
      case BookingStatus::cancelled:
        break;
      case BookingStatus::pending:
        if (at_quiesce) return "booking still pending at quiesce";
        break;
    }

    if (payment && payment->status == PaymentStatus::charged &&
        b.status == BookingStatus::compensated) {
      return "charged payment on a compensated booking";
    }

    if (unbalanced.count(b.flight_id)) {
      return "seat conservation violated on " + b.flight_id;
    }

    if (at_quiesce) {
      size_t notifications =
          bed_->notifications().records_for(b.booking_id).size();
      auto trail = events.find(b.booking_id);
      bool created = trail != events.end() && trail->second.count("booking.created");
      bool confirmed =
          trail != events.end() && trail->second.count("booking.confirmed");
      bool compensated =
          trail != events.end() && trail->second.count("booking.compensated");
      switch (b.status) {
        case BookingStatus::confirmed:
          if (notifications < 1) return "confirmed booking without notification";
          if (!created || !confirmed || compensated) {
            return "confirmed booking with wrong event trail";
          }
          break;
        case BookingStatus::compensated:
          if (notifications != 0) return "compensated booking with notification";
          if (!created || !compensated || confirmed) {
            return "compensated booking with wrong event trail";
          }
          break;
        case BookingStatus::cancelled:
          if (notifications != 0) return "rejected booking with notification";
          if (trail != events.end()) {
            return "rejected booking published events";
          }
          break;
        case BookingStatus::pending:
          break;
      }
    }
    return {};
  }

  Testbed* bed_;
};

}  // namespace flightdeck
