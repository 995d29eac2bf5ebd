#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flightdeck/auth.hpp"
#include "flightdeck/clock.hpp"
#include "flightdeck/error.hpp"
#include "flightdeck/json_util.hpp"

namespace flightdeck {

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  Json body;
  std::string source = "local";  // rate-limit identity fallback
};

struct Response {
  int status = 200;
  Json body;
  std::string correlation_id;
};

struct RequestContext {
  const Request* request = nullptr;
  std::map<std::string, std::string> path_params;
  std::optional<Claims> claims;
  std::string correlation_id;
};

struct HandlerReply {
  int status = 200;
  Json body;
};

using RouteHandler = std::function<Result<HandlerReply>(const RequestContext&)>;

struct Route {
  std::string method;
  std::string pattern;                        // e.g. /v1/bookings/{id}
  std::optional<std::string> required_scope;  // nullopt = public
  RouteHandler handler;
};

/// Token bucket per client: `capacity` burst, `refill_rate` tokens/s. Allow
/// consumes one token after accruing refill; Deny consumes nothing.
class RateLimiter {
 public:
  RateLimiter(Clock* clock, double capacity = 100, double refill_rate = 100)
      : clock_(clock), capacity_(capacity), rate_(refill_rate) {}

  bool check(const std::string& client_id) {
    std::lock_guard lock(m_);
    int64_t now = clock_->now_ns();
    auto [it, fresh] = buckets_.try_emplace(client_id, Bucket{capacity_, now});
    Bucket& b = it->second;
    if (!fresh) {
      double dt = double(now - b.last_refill_ns) / double(kNsPerSec);
      if (dt > 0) {
        b.tokens = std::min(capacity_, b.tokens + rate_ * dt);
        b.last_refill_ns = now;
      }
    }
    if (b.tokens >= 1.0) {
      b.tokens -= 1.0;
      return true;
    }
    return false;
  }

  // Test hook: empties the bucket so steady-state refill behavior can be
  // measured without the initial burst.
  void drain(const std::string& client_id) {
    std::lock_guard lock(m_);
    buckets_[client_id] = Bucket{0.0, clock_->now_ns()};
  }

 private:
  struct Bucket {
    double tokens;
    int64_t last_refill_ns;
  };

  Clock* clock_;
  double capacity_;
  double rate_;
  std::mutex m_;
  std::map<std::string, Bucket> buckets_;
};

/// Single entry point. Checks run in a fixed order -- rate limit, token
/// verification, route, scope -- and any rejection happens before the target
/// service sees the request.
class Gateway {
 public:
  Gateway(Clock* clock, TokenService* auth, double rl_capacity = 100,
          double rl_rate = 100)
      : clock_(clock), auth_(auth), limiter_(clock, rl_capacity, rl_rate) {}

  void add_route(std::string method, std::string pattern,
                 std::optional<std::string> required_scope,
                 RouteHandler handler) {
    routes_.push_back(Route{std::move(method), std::move(pattern),
                            std::move(required_scope), std::move(handler)});
  }

  Response dispatch(const Request& req) {
    std::string corr = correlation_id_for(req);

    const std::string* auth_header = find_header(req, "authorization");
    std::optional<Claims> claims;
    std::optional<Error> auth_error;
    if (auth_header) {
      auto token = bearer_token(*auth_header);
      if (!token) {
        auth_error = Error{Errc::unauthorized, "malformed authorization header"};
      } else {
        auto verified = auth_->verify(*token, "");
        if (verified.ok()) {
          claims = verified.value();
        } else {
          auth_error = verified.error();
        }
      }
    }

    // 1. rate limit (identity: subject when authenticated, else source)
    std::string client_id = claims ? claims->sub : req.source;
    if (!limiter_.check(client_id)) {
      return error_response(429, Errc::rate_limited, "rate limit exceeded",
                            corr);
    }

    // 2. token verification (when a credential was presented)
    if (auth_error) {
      return error_response(status_for(auth_error->code), auth_error->code,
                            auth_error->message, corr);
    }

    // 3. route
    RequestContext ctx;
    ctx.request = &req;
    ctx.claims = claims;
    ctx.correlation_id = corr;
    const Route* route = match(req.method, req.path, ctx.path_params);
    if (route == nullptr) {
      return error_response(404, Errc::no_route, "no such route", corr);
    }

    // 4. scope
    if (route->required_scope) {
      if (!claims) {
        return error_response(401, Errc::unauthorized,
                              "missing bearer token", corr);
      }
      if (!claims->has_scope(*route->required_scope)) {
        return error_response(403, Errc::insufficient_scope,
                              "missing scope: " + *route->required_scope, corr);
      }
    }

    // 5. forward
    Result<HandlerReply> reply = route->handler(ctx);
    if (!reply.ok()) {
      const Error& e = reply.error();
      return error_response(status_for(e.code), e.code, e.message, corr);
    }
    Response resp;
    resp.status = reply.value().status;
    resp.body = reply.value().body;
    if (resp.body.is_object()) resp.body["correlation_id"] = corr;
    resp.correlation_id = corr;
    return resp;
  }

  RateLimiter& rate_limiter() { return limiter_; }

  static int status_for(Errc code) {
    switch (code) {
      case Errc::rate_limited: return 429;
      case Errc::unauthorized:
      case Errc::bad_signature:
      case Errc::expired:
      case Errc::revoked: return 401;
      case Errc::insufficient_scope:
      case Errc::forbidden_scope: return 403;
      case Errc::no_route:
      case Errc::not_found: return 404;
      case Errc::invalid_argument:
      case Errc::bad_selection:
      case Errc::conflict: return 400;
      case Errc::service_failure:
      case Errc::stuck_compensating: return 502;
      default: return 500;
    }
  }

 private:
  static const std::string* find_header(const Request& req,
                                        const std::string& name) {
    auto it = req.headers.find(name);
    return it == req.headers.end() ? nullptr : &it->second;
  }

  static std::optional<std::string> bearer_token(const std::string& header) {
    constexpr std::string_view prefix = "Bearer ";
    if (header.size() <= prefix.size() ||
        header.compare(0, prefix.size(), prefix) != 0) {
      return std::nullopt;
    }
    return header.substr(prefix.size());
  }

  std::string correlation_id_for(const Request& req) {
    if (const auto* h = find_header(req, "x-correlation-id"); h && !h->empty()) {
      return *h;
    }
    return "c-" + std::to_string(next_corr_.fetch_add(1));
  }

  const Route* match(const std::string& method, const std::string& path,
                     std::map<std::string, std::string>& params) const {
    auto segments = split(path);
    for (const auto& route : routes_) {
      if (route.method != method) continue;
      auto pattern = split(route.pattern);
      if (pattern.size() != segments.size()) continue;
      std::map<std::string, std::string> captured;
      bool matched = true;
      for (size_t i = 0; i < pattern.size(); ++i) {
        const std::string& p = pattern[i];
        if (p.size() > 2 && p.front() == '{' && p.back() == '}') {
          captured[p.substr(1, p.size() - 2)] = segments[i];
        } else if (p != segments[i]) {
          matched = false;
          break;
        }
      }
      if (matched) {
        params = std::move(captured);
        return &route;
      }
    }
    return nullptr;
  }

  static std::vector<std::string> split(const std::string& path) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start < path.size()) {
      size_t end = path.find('/', start);
      if (end == std::string::npos) end = path.size();
      if (end > start) out.push_back(path.substr(start, end - start));
      start = end + 1;
    }
    return out;
  }

  Response error_response(int status, Errc code, const std::string& message,
                          const std::string& corr) {
    Response resp;
    resp.status = status;
    resp.body["error"] = errc_name(code);
    resp.body["message"] = message;
    resp.body["correlation_id"] = corr;
    resp.correlation_id = corr;
    return resp;
  }

  Clock* clock_;
  TokenService* auth_;
  RateLimiter limiter_;
  std::vector<Route> routes_;
  std::atomic<uint64_t> next_corr_{1};
};

}  // namespace flightdeck
