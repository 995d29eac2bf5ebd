#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flightdeck/base64.hpp"
#include "flightdeck/clock.hpp"
#include "flightdeck/error.hpp"
#include "flightdeck/json_util.hpp"
#include "flightdeck/sha256.hpp"

namespace flightdeck {

struct Claims {
  std::string sub;
  int64_t iat = 0;  // unix seconds
  int64_t exp = 0;  // unix seconds
  std::vector<std::string> scopes;
  std::string jti;

  bool has_scope(const std::string& s) const {
    return std::find(scopes.begin(), scopes.end(), s) != scopes.end();
  }
};

struct IssuedTokens {
  std::string access_token;
  int64_t expires_in = 0;  // seconds
  std::string refresh_token;
};

/// Token issuance and stateless verification. Access tokens are three
/// base64url segments (header.claims.signature) signed with HMAC-SHA256 over
/// a shared secret; verification needs only the token, the secret, the clock
/// and the revocation set. Refresh tokens rotate: using one revokes it and
/// links it to its successor.
class TokenService {
 public:
  static constexpr int64_t kAccessLifetimeS = 900;
  static constexpr int64_t kRefreshLifetimeS = 24 * 3600;

  TokenService(Clock* clock, std::string secret)
      : clock_(clock), secret_(std::move(secret)) {}

  void add_user(const std::string& user_id, const std::string& salt,
                const std::string& password_hash,
                std::set<std::string> allowed_scopes) {
    std::lock_guard lock(m_);
    users_[user_id] = User{salt, password_hash, std::move(allowed_scopes)};
  }

  static std::string password_hash(const std::string& salt,
                                   const std::string& password) {
    return sha256_hex(salt + password);
  }

  Result<IssuedTokens> issue(const std::string& user_id,
                             const std::string& password,
                             const std::vector<std::string>& scopes) {
    std::lock_guard lock(m_);
    auto it = users_.find(user_id);
    if (it == users_.end() ||
        password_hash(it->second.salt, password) != it->second.password_hash) {
      return Error{Errc::unauthorized, "bad credentials"};
    }
    for (const auto& s : scopes) {
      if (!it->second.allowed_scopes.count(s)) {
        return Error{Errc::forbidden_scope, "scope not granted: " + s};
      }
    }
    return issue_locked(user_id, scopes);
  }

  Result<Claims> verify(const std::string& token,
                        const std::string& required_scope) const {
    // Signature, expiry, scope, revocation -- in that order.
    size_t dot1 = token.find('.');
    size_t dot2 = dot1 == std::string::npos ? std::string::npos
                                            : token.find('.', dot1 + 1);
    if (dot2 == std::string::npos ||
        token.find('.', dot2 + 1) != std::string::npos) {
      return Error{Errc::bad_signature, "malformed token"};
    }
    std::string_view view(token);
    auto signing_input = view.substr(0, dot2);
    auto sig_b64 = view.substr(dot2 + 1);
    auto sig = base64url_decode(sig_b64);
    if (!sig) return Error{Errc::bad_signature, "malformed signature"};
    auto expect = hmac_sha256(secret_, signing_input);
    if (!constant_time_equal(
            *sig, std::string_view(reinterpret_cast<const char*>(expect.data()),
                                   expect.size()))) {
      return Error{Errc::bad_signature, "signature mismatch"};
    }

    auto header_raw = base64url_decode(view.substr(0, dot1));
    auto claims_raw = base64url_decode(view.substr(dot1 + 1, dot2 - dot1 - 1));
    if (!header_raw || !claims_raw) {
      return Error{Errc::bad_signature, "malformed segments"};
    }
    bool ok = false;
    Json header = parse_json(*header_raw, &ok);
    if (!ok || get_string(header, "alg") != "HS256") {
      return Error{Errc::bad_signature, "unsupported header"};
    }
    Json body = parse_json(*claims_raw, &ok);
    if (!ok || !body.is_object()) {
      return Error{Errc::bad_signature, "malformed claims"};
    }

    Claims claims;
    claims.sub = get_string(body, "sub");
    claims.jti = get_string(body, "jti");
    claims.iat = body.value("iat", int64_t{0});
    claims.exp = body.value("exp", int64_t{0});
    if (body.contains("scope") && body["scope"].is_array()) {
      for (const auto& s : body["scope"]) {
        if (s.is_string()) claims.scopes.push_back(s.get<std::string>());
      }
    }

    if (clock_->now_unix_s() >= claims.exp) {
      return Error{Errc::expired, "token expired"};
    }
    if (!required_scope.empty() && !claims.has_scope(required_scope)) {
      return Error{Errc::insufficient_scope,
                   "missing scope: " + required_scope};
    }
    {
      std::lock_guard lock(m_);
      if (revoked_.count(claims.jti)) {
        return Error{Errc::revoked, "token revoked"};
      }
    }
    return claims;
  }

  Result<IssuedTokens> refresh(const std::string& refresh_id) {
    std::lock_guard lock(m_);
    auto it = refresh_.find(refresh_id);
    if (it == refresh_.end()) {
      return Error{Errc::not_found, "unknown refresh token"};
    }
    auto& rec = it->second;
    if (rec.revoked) {
      return Error{Errc::revoked, "refresh token already used or revoked"};
    }
    if (clock_->now_ns() >= rec.expires_ns) {
      return Error{Errc::expired, "refresh token expired"};
    }
    rec.revoked = true;
    auto issued = issue_locked(rec.sub, rec.scopes);
    rec.successor = issued.value().refresh_token;
    return issued;
  }

  // Idempotent; unknown ids are accepted as a no-op.
  void revoke(const std::string& jti) {
    std::lock_guard lock(m_);
    revoked_.insert(jti);
  }

  struct RefreshRecord {
    std::string sub;
    int64_t expires_ns = 0;
    bool revoked = false;
    std::optional<std::string> successor;
    std::vector<std::string> scopes;
  };

  std::optional<RefreshRecord> refresh_record(const std::string& id) const {
    std::lock_guard lock(m_);
    auto it = refresh_.find(id);
    if (it == refresh_.end()) return std::nullopt;
    return it->second;
  }

  static std::string encode(const Json& header, const Json& claims,
                            const std::string& secret) {
    std::string signing_input =
        base64url_encode(header.dump()) + "." + base64url_encode(claims.dump());
    auto sig = hmac_sha256(secret, signing_input);
    return signing_input + "." +
           base64url_encode(std::string_view(
               reinterpret_cast<const char*>(sig.data()), sig.size()));
  }

 private:
  struct User {
    std::string salt;
    std::string password_hash;
    std::set<std::string> allowed_scopes;
  };

  Result<IssuedTokens> issue_locked(const std::string& sub,
                                    const std::vector<std::string>& scopes) {
    int64_t now_s = clock_->now_unix_s();
    Json claims;
    claims["sub"] = sub;
    claims["iat"] = now_s;
    claims["exp"] = now_s + kAccessLifetimeS;
    claims["jti"] = "jti-" + std::to_string(next_jti_++);
    claims["scope"] = scopes;
    Json header;
    header["alg"] = "HS256";
    header["typ"] = "JWT";

    IssuedTokens out;
    out.access_token = encode(header, claims, secret_);
    out.expires_in = kAccessLifetimeS;
    out.refresh_token = "rt-" + std::to_string(next_refresh_++);
    RefreshRecord rec;
    rec.sub = sub;
    rec.expires_ns = clock_->now_ns() + kRefreshLifetimeS * kNsPerSec;
    rec.scopes = scopes;
    refresh_[out.refresh_token] = std::move(rec);
    return out;
  }

  Clock* clock_;
  std::string secret_;
  mutable std::mutex m_;
  std::map<std::string, User> users_;
  std::map<std::string, RefreshRecord> refresh_;
  std::set<std::string> revoked_;
  uint64_t next_jti_ = 1;
  uint64_t next_refresh_ = 1;
};

}  // namespace flightdeck
