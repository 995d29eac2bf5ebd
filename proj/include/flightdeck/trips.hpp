#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "flightdeck/auth.hpp"
#include "flightdeck/error.hpp"
#include "flightdeck/json_util.hpp"
#include "flightdeck/services.hpp"

namespace flightdeck {

/// Field-selection aggregation over the four read services. A selection is a
/// JSON tree: top-level keys pick sections, nested keys pick fields; an empty
/// object selects every field of the section. Anything outside the fixed
/// schema is rejected before any service call.
class TripAggregator {
 public:
  TripAggregator(BookingService* bookings, FlightService* flights,
                 PaymentService* payments, ProfileService* profiles)
      : bookings_(bookings),
        flights_(flights),
        payments_(payments),
        profiles_(profiles) {}

  static const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"profile", {"user_id", "name", "preferences", "loyalty_points"}},
        {"bookings",
         {"booking_id", "user_id", "flight_id", "seats", "status",
          "payment_id", "created_ts"}},
        {"flights",
         {"flight_id", "origin", "destination", "date", "departure_ts",
          "capacity", "seats_available", "price"}},
        {"payments", {"payment_id", "booking_id", "amount", "status"}},
    };
    return s;
  }

  static Json full_selection() {
    Json sel = Json::object();
    for (const auto& [section, fields] : schema()) {
      sel[section] = Json::object();
    }
    return sel;
  }

  Status validate_selection(const Json& selection) const {
    if (!selection.is_object()) {
      return make_error(Errc::bad_selection, "selection must be an object");
    }
    const auto& s = schema();
    for (auto it = selection.begin(); it != selection.end(); ++it) {
      auto section = s.find(it.key());
      if (section == s.end()) {
        return make_error(Errc::bad_selection, "unknown section: " + it.key());
      }
      if (!it.value().is_object()) {
        return make_error(Errc::bad_selection,
                          "section selection must be an object: " + it.key());
      }
      for (auto f = it.value().begin(); f != it.value().end(); ++f) {
        if (!section->second.count(f.key())) {
          return make_error(Errc::bad_selection,
                            "unknown field: " + it.key() + "." + f.key());
        }
      }
    }
    return {};
  }

  /// Assembles exactly the selected sections and fields. The caller must be
  /// the subject itself or hold the admin scope. A failing downstream section
  /// turns into an error marker instead of failing the whole document.
  Result<Json> aggregate(const std::string& user_id, const Json& selection,
                         const Claims& claims) const {
    if (claims.sub != user_id && !claims.has_scope("admin")) {
      return Error{Errc::insufficient_scope,
                   "not authorized for this subject"};
    }
    if (Status v = validate_selection(selection); !v.ok()) return v.error();

    auto profile = profiles_->get_user(user_id);
    if (!profile.ok() && profile.code() == Errc::not_found) {
      return profile.error();
    }

    Json out = Json::object();
    std::vector<Booking> bookings = bookings_->bookings_for_user(user_id);

    if (selection.contains("profile")) {
      if (profile.ok()) {
        out["profile"] = project(profile.value(), selection["profile"],
                                 schema().at("profile"));
      } else {
        out["profile"] = error_marker(profile.error());
      }
    }
    if (selection.contains("bookings")) {
      Json arr = Json::array();
      for (const auto& b : bookings) {
        arr.push_back(project(b.to_json(), selection["bookings"],
                              schema().at("bookings")));
      }
      out["bookings"] = arr;
    }
    if (selection.contains("flights")) {
      Json arr = Json::array();
      std::set<std::string> seen;
      bool failed = false;
      Error err;
      for (const auto& b : bookings) {
        if (!seen.insert(b.flight_id).second) continue;
        auto f = flights_->get_flight(b.flight_id);
        if (!f.ok()) {
          failed = true;
          err = f.error();
          break;
        }
        arr.push_back(project(f.value().to_json(), selection["flights"],
                              schema().at("flights")));
      }
      out["flights"] = failed ? error_marker(err) : arr;
    }
    if (selection.contains("payments")) {
      Json arr = Json::array();
      bool failed = false;
      Error err;
      for (const auto& b : bookings) {
        if (b.payment_id.empty()) continue;
        auto p = payments_->get_payment(b.payment_id);
        if (!p.ok()) {
          failed = true;
          err = p.error();
          break;
        }
        arr.push_back(project(p.value().to_json(), selection["payments"],
                              schema().at("payments")));
      }
      out["payments"] = failed ? error_marker(err) : arr;
    }
    return out;
  }

  /// The read-only trip composition: profile plus bookings plus the flights
  /// and payments they reference.
  Result<Json> get_trip(const std::string& user_id, const Claims& claims) const {
    return aggregate(user_id, full_selection(), claims);
  }

 private:
  static Json project(const Json& doc, const Json& fields,
                      const std::set<std::string>& all) {
    Json out = Json::object();
    if (fields.empty()) {
      for (const auto& f : all) {
        if (doc.contains(f)) out[f] = doc[f];
      }
      return out;
    }
    for (auto it = fields.begin(); it != fields.end(); ++it) {
      if (doc.contains(it.key())) out[it.key()] = doc[it.key()];
    }
    return out;
  }

  static Json error_marker(const Error& e) {
    Json j;
    j["error"] = errc_name(e.code);
    j["message"] = e.message;
    return j;
  }

  BookingService* bookings_;
  FlightService* flights_;
  PaymentService* payments_;
  ProfileService* profiles_;
};

}  // namespace flightdeck
