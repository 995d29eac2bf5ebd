#pragma once

#include <cstdint>
#include <string>

#include "flightdeck/json_util.hpp"

namespace flightdeck {

inline constexpr const char* kTopicBookings = "bookings";
inline constexpr const char* kTopicPayments = "payments";
inline constexpr const char* kTopicInventory = "inventory";
inline constexpr const char* kQueueEmail = "notify.email";
inline constexpr const char* kQueueSms = "notify.sms";

struct Flight {
  std::string flight_id;
  std::string origin;
  std::string destination;
  std::string date;           // YYYY-MM-DD departure date
  int64_t departure_ts = 0;   // unix seconds
  int32_t capacity = 0;
  int32_t seats_available = 0;
  int64_t price = 0;          // minor currency units per seat

  Json to_json() const {
    Json j;
    j["flight_id"] = flight_id;
    j["origin"] = origin;
    j["destination"] = destination;
    j["date"] = date;
    j["departure_ts"] = departure_ts;
    j["capacity"] = capacity;
    j["seats_available"] = seats_available;
    j["price"] = price;
    return j;
  }

  static Flight from_json(const Json& j) {
    Flight f;
    f.flight_id = j.value("flight_id", std::string{});
    f.origin = j.value("origin", std::string{});
    f.destination = j.value("destination", std::string{});
    f.date = j.value("date", std::string{});
    f.departure_ts = j.value("departure_ts", int64_t{0});
    f.capacity = j.value("capacity", int32_t{0});
    f.seats_available = j.value("seats_available", int32_t{0});
    f.price = j.value("price", int64_t{0});
    return f;
  }
};

enum class BookingStatus { pending, confirmed, cancelled, compensated };

inline const char* booking_status_name(BookingStatus s) {
  switch (s) {
    case BookingStatus::pending: return "pending";
    case BookingStatus::confirmed: return "confirmed";
    case BookingStatus::cancelled: return "cancelled";
    case BookingStatus::compensated: return "compensated";
  }
  return "unknown";
}

inline BookingStatus booking_status_from(const std::string& s) {
  if (s == "confirmed") return BookingStatus::confirmed;
  if (s == "cancelled") return BookingStatus::cancelled;
  if (s == "compensated") return BookingStatus::compensated;
  return BookingStatus::pending;
}

struct Booking {
  std::string booking_id;
  std::string user_id;
  std::string flight_id;
  int32_t seats = 0;
  BookingStatus status = BookingStatus::pending;
  std::string payment_id;  // empty until charged
  int64_t created_ts = 0;  // unix seconds
  std::string reason;      // set for cancelled/compensated bookings

  Json to_json() const {
    Json j;
    j["booking_id"] = booking_id;
    j["user_id"] = user_id;
    j["flight_id"] = flight_id;
    j["seats"] = seats;
    j["status"] = booking_status_name(status);
    j["payment_id"] = payment_id;
    j["created_ts"] = created_ts;
    j["reason"] = reason;
    return j;
  }

  static Booking from_json(const Json& j) {
    Booking b;
    b.booking_id = j.value("booking_id", std::string{});
    b.user_id = j.value("user_id", std::string{});
    b.flight_id = j.value("flight_id", std::string{});
    b.seats = j.value("seats", int32_t{0});
    b.status = booking_status_from(j.value("status", std::string{}));
    b.payment_id = j.value("payment_id", std::string{});
    b.created_ts = j.value("created_ts", int64_t{0});
    b.reason = j.value("reason", std::string{});
    return b;
  }
};

enum class PaymentStatus { pending, charged, refunded, failed };

inline const char* payment_status_name(PaymentStatus s) {
  switch (s) {
    case PaymentStatus::pending: return "pending";
    case PaymentStatus::charged: return "charged";
    case PaymentStatus::refunded: return "refunded";
    case PaymentStatus::failed: return "failed";
  }
  return "unknown";
}

inline PaymentStatus payment_status_from(const std::string& s) {
  if (s == "charged") return PaymentStatus::charged;
  if (s == "refunded") return PaymentStatus::refunded;
  if (s == "failed") return PaymentStatus::failed;
  return PaymentStatus::pending;
}

struct Payment {
  std::string payment_id;
  std::string booking_id;
  int64_t amount = 0;  // minor units
  PaymentStatus status = PaymentStatus::pending;

  Json to_json() const {
    Json j;
    j["payment_id"] = payment_id;
    j["booking_id"] = booking_id;
    j["amount"] = amount;
    j["status"] = payment_status_name(status);
    return j;
  }

  static Payment from_json(const Json& j) {
    Payment p;
    p.payment_id = j.value("payment_id", std::string{});
    p.booking_id = j.value("booking_id", std::string{});
    p.amount = j.value("amount", int64_t{0});
    p.status = payment_status_from(j.value("status", std::string{}));
    return p;
  }
};

}  // namespace flightdeck
