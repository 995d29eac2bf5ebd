#pragma once

#include <memory>
#include <string>
#include <thread>

#include <httplib.h>

#include "flightdeck/gateway.hpp"
#include "flightdeck/json_util.hpp"

namespace flightdeck {

/// Uniform request execution across the two transports: direct gateway calls
/// in-process, JSON over loopback HTTP/1.1 otherwise. Both carry the same
/// request/response structures.
class RequestExecutor {
 public:
  virtual ~RequestExecutor() = default;
  virtual Response execute(const Request& req) = 0;
};

class InProcessExecutor final : public RequestExecutor {
 public:
  explicit InProcessExecutor(Gateway* gateway) : gateway_(gateway) {}
  Response execute(const Request& req) override {
    return gateway_->dispatch(req);
  }

 private:
  Gateway* gateway_;
};

/// Serves the gateway over HTTP. Every route goes through the same dispatch
/// path as in-process calls; status codes and bodies are identical.
class HttpGatewayServer {
 public:
  explicit HttpGatewayServer(Gateway* gateway) : gateway_(gateway) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res);
    };
    server_.Get(".*", handler);
    server_.Post(".*", handler);
    server_.Put(".*", handler);
    server_.Delete(".*", handler);
  }

  ~HttpGatewayServer() { stop(); }

  // Binds to an ephemeral port when `port` is 0. Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0) {
    host_ = host;
    if (port == 0) {
      port_ = server_.bind_to_any_port(host.c_str());
    } else {
      if (!server_.bind_to_port(host.c_str(), port)) return -1;
      port_ = port;
    }
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  int port() const { return port_; }
  const std::string& host() const { return host_; }

 private:
  void handle(const httplib::Request& req, httplib::Response& res) {
    Request r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [key, value] : req.params) r.query[key] = value;
    if (req.has_header("Authorization")) {
      r.headers["authorization"] = req.get_header_value("Authorization");
    }
    if (req.has_header("X-Correlation-Id")) {
      r.headers["x-correlation-id"] = req.get_header_value("X-Correlation-Id");
    }
    r.source = req.remote_addr;
    if (!req.body.empty()) {
      bool ok = false;
      r.body = parse_json(req.body, &ok);
      if (!ok) {
        res.status = 400;
        Json err;
        err["error"] = "invalid_argument";
        err["message"] = "request body is not valid JSON";
        res.set_content(err.dump(), "application/json");
        return;
      }
    }
    Response out = gateway_->dispatch(r);
    res.status = out.status;
    res.set_header("X-Correlation-Id", out.correlation_id);
    res.set_content(out.body.is_null() ? "{}" : out.body.dump(),
                    "application/json");
  }

  Gateway* gateway_;
  httplib::Server server_;
  std::thread thread_;
  std::string host_;
  int port_ = -1;
};

class HttpExecutor final : public RequestExecutor {
 public:
  HttpExecutor(const std::string& host, int port) : client_(host, port) {
    client_.set_keep_alive(true);
  }

  Response execute(const Request& req) override {
    httplib::Headers headers;
    for (const auto& [key, value] : req.headers) {
      headers.emplace(key, value);
    }
    std::string target = req.path;
    if (!req.query.empty()) {
      target += '?';
      bool first = true;
      for (const auto& [key, value] : req.query) {
        if (!first) target += '&';
        first = false;
        target += url_encode(key) + "=" + url_encode(value);
      }
    }
    httplib::Result result;
    if (req.method == "GET") {
      result = client_.Get(target, headers);
    } else if (req.method == "POST") {
      result = client_.Post(target, headers, req.body.dump(),
                            "application/json");
    } else if (req.method == "PUT") {
      result = client_.Put(target, headers, req.body.dump(),
                           "application/json");
    }
    Response out;
    if (!result) {
      out.status = 502;
      out.body["error"] = "service_failure";
      out.body["message"] = "transport error";
      return out;
    }
    out.status = result->status;
    if (!result->body.empty()) out.body = parse_json(result->body);
    out.correlation_id = result->get_header_value("X-Correlation-Id");
    return out;
  }

 private:
  static std::string url_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
      if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
        out.push_back(char(c));
      } else {
        out.push_back('%');
        out.push_back(hex[c >> 4]);
        out.push_back(hex[c & 0xf]);
      }
    }
    return out;
  }

  httplib::Client client_;
};

}  // namespace flightdeck
