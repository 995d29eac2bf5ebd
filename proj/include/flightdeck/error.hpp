#pragma once

#include <cassert>
#include <string>
#include <utility>
#include <variant>

namespace flightdeck {

enum class Errc {
  ok,
  already_exists,
  not_found,
  out_of_range,
  stale_tag,
  invalid_argument,
  conflict,
  unauthorized,
  forbidden_scope,
  bad_signature,
  expired,
  insufficient_scope,
  revoked,
  rate_limited,
  no_route,
  service_failure,
  bad_selection,
  insufficient_seats,
  invalid_state,
  rejected_journal,
  stuck_compensating,
  io_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ok: return "ok";
    case Errc::already_exists: return "already_exists";
    case Errc::not_found: return "not_found";
    case Errc::out_of_range: return "out_of_range";
    case Errc::stale_tag: return "stale_tag";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::conflict: return "conflict";
    case Errc::unauthorized: return "unauthorized";
    case Errc::forbidden_scope: return "forbidden_scope";
    case Errc::bad_signature: return "bad_signature";
    case Errc::expired: return "expired";
    case Errc::insufficient_scope: return "insufficient_scope";
    case Errc::revoked: return "revoked";
    case Errc::rate_limited: return "rate_limited";
    case Errc::no_route: return "no_route";
    case Errc::service_failure: return "service_failure";
    case Errc::bad_selection: return "bad_selection";
    case Errc::insufficient_seats: return "insufficient_seats";
    case Errc::invalid_state: return "invalid_state";
    case Errc::rejected_journal: return "rejected_journal";
    case Errc::stuck_compensating: return "stuck_compensating";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

struct Error {
  Errc code = Errc::ok;
  std::string message;
};

inline Error make_error(Errc code, std::string message = {}) {
  return Error{code, std::move(message)};
}

/// Value-or-error carrier used across module boundaries. Errors are part of
/// each operation's contract, so they travel as values rather than exceptions.
template <typename T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Error err) : v_(std::move(err)) { assert(error().code != Errc::ok); }

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  const T& value() const {
    assert(ok());
    return std::get<T>(v_);
  }
  T& value() {
    assert(ok());
    return std::get<T>(v_);
  }
  T take() {
    assert(ok());
    return std::move(std::get<T>(v_));
  }

  const Error& error() const {
    assert(!ok());
    return std::get<Error>(v_);
  }
  Errc code() const { return ok() ? Errc::ok : error().code; }

 private:
  std::variant<T, Error> v_;
};

/// Result for operations with no payload.
class Status {
 public:
  Status() = default;
  Status(Error err) : err_(std::move(err)) {}

  bool ok() const { return err_.code == Errc::ok; }
  explicit operator bool() const { return ok(); }
  const Error& error() const { return err_; }
  Errc code() const { return err_.code; }

  static Status success() { return Status(); }

 private:
  Error err_;
};

}  // namespace flightdeck
