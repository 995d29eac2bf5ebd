#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "flightdeck/error.hpp"
#include "flightdeck/json_util.hpp"
#include "flightdeck/sha256.hpp"

namespace flightdeck {

/// Schemaless per-service document store: named collections of JSON documents
/// keyed by doc_id, with conjunctive field-equality queries.
class DocumentStore {
 public:
  Status put(const std::string& collection, const std::string& doc_id,
             Json document) {
    if (!document.is_object()) {
      return make_error(Errc::invalid_argument, "document must be an object");
    }
    std::lock_guard lock(m_);
    collections_[collection][doc_id] = std::move(document);
    return {};
  }

  std::optional<Json> get(const std::string& collection,
                          const std::string& doc_id) const {
    std::lock_guard lock(m_);
    auto c = collections_.find(collection);
    if (c == collections_.end()) return std::nullopt;
    auto d = c->second.find(doc_id);
    if (d == c->second.end()) return std::nullopt;
    return d->second;
  }

  bool remove(const std::string& collection, const std::string& doc_id) {
    std::lock_guard lock(m_);
    auto c = collections_.find(collection);
    if (c == collections_.end()) return false;
    return c->second.erase(doc_id) > 0;
  }

  // All documents matching every field in `filter`, in doc_id order.
  std::vector<Json> query(const std::string& collection,
                          const Json& filter) const {
    std::lock_guard lock(m_);
    std::vector<Json> out;
    auto c = collections_.find(collection);
    if (c == collections_.end()) return out;
    for (const auto& [id, doc] : c->second) {
      bool match = true;
      for (auto it = filter.begin(); it != filter.end(); ++it) {
        auto f = doc.find(it.key());
        if (f == doc.end() || *f != it.value()) {
          match = false;
          break;
        }
      }
      if (match) out.push_back(doc);
    }
    return out;
  }

  size_t size(const std::string& collection) const {
    std::lock_guard lock(m_);
    auto c = collections_.find(collection);
    return c == collections_.end() ? 0 : c->second.size();
  }

  // Content hash over the canonical serialization; independent of insertion
  // order because collections and documents are kept in sorted maps.
  std::string digest() const {
    std::lock_guard lock(m_);
    Sha256 h;
    for (const auto& [name, docs] : collections_) {
      for (const auto& [id, doc] : docs) {
        h.update(name);
        h.update("\t");
        h.update(id);
        h.update("\t");
        h.update(doc.dump());
        h.update("\n");
      }
    }
    return to_hex(h.finish());
  }

  void write_snapshot(std::ostream& os) const {
    std::lock_guard lock(m_);
    for (const auto& [name, docs] : collections_) {
      for (const auto& [id, doc] : docs) {
        Json line;
        line["collection"] = name;
        line["doc_id"] = id;
        line["document"] = doc;
        os << line.dump() << "\n";
      }
    }
  }

 private:
  mutable std::mutex m_;
  std::map<std::string, std::map<std::string, Json>> collections_;
};

/// Buffered transaction over the key-value store. Writes stay invisible to
/// other handles until commit; reads inside the handle observe its own prior
/// writes. Single use: commit or abort ends the handle.
class TxnHandle {
 public:
  uint64_t txn_id() const { return txn_id_; }
  bool live() const { return state_ == State::live; }

 private:
  friend class TxnStore;
  enum class State { live, committed, aborted };

  uint64_t txn_id_ = 0;
  State state_ = State::live;
  std::map<std::string, uint64_t> read_versions_;  // 0 = read as absent
  std::map<std::string, std::string> writes_;
};

/// Transactional key-value store with optimistic concurrency: a commit
/// applies its whole write set atomically iff no committed writer has changed
/// any key in the handle's read set since the handle began.
class TxnStore {
 public:
  TxnHandle begin() {
    std::lock_guard lock(m_);
    TxnHandle h;
    h.txn_id_ = next_txn_id_++;
    return h;
  }

  std::optional<std::string> get(TxnHandle& h, const std::string& key) const {
    if (!h.live()) return std::nullopt;
    auto w = h.writes_.find(key);
    if (w != h.writes_.end()) return w->second;
    std::lock_guard lock(m_);
    auto it = committed_.find(key);
    uint64_t version = it == committed_.end() ? 0 : it->second.version;
    h.read_versions_.emplace(key, version);
    if (it == committed_.end()) return std::nullopt;
    return it->second.value;
  }

  void set(TxnHandle& h, const std::string& key, std::string value) {
    if (!h.live()) return;
    h.writes_[key] = std::move(value);
  }

  Status commit(TxnHandle& h) {
    if (!h.live()) {
      return make_error(Errc::invalid_state, "handle is no longer live");
    }
    std::lock_guard lock(m_);
    for (const auto& [key, seen] : h.read_versions_) {
      auto it = committed_.find(key);
      uint64_t current = it == committed_.end() ? 0 : it->second.version;
      if (current != seen) {
        h.state_ = TxnHandle::State::aborted;
        return make_error(Errc::conflict, "read set changed: " + key);
      }
    }
    Json log_keys = Json::array();
    for (auto& [key, value] : h.writes_) {
      auto& slot = committed_[key];
      slot.value = value;
      slot.version = next_version_++;
      log_keys.push_back(key);
    }
    Json entry;
    entry["txn_id"] = h.txn_id_;
    entry["keys"] = std::move(log_keys);
    commit_log_.push_back(std::move(entry));
    h.state_ = TxnHandle::State::committed;
    return {};
  }

  void abort(TxnHandle& h) {
    if (!h.live()) return;
    h.writes_.clear();
    h.state_ = TxnHandle::State::aborted;
  }

  // Snapshot read outside any transaction.
  std::optional<std::string> read(const std::string& key) const {
    std::lock_guard lock(m_);
    auto it = committed_.find(key);
    if (it == committed_.end()) return std::nullopt;
    return it->second.value;
  }

  std::vector<std::pair<std::string, std::string>> read_prefix(
      const std::string& prefix) const {
    std::lock_guard lock(m_);
    std::vector<std::pair<std::string, std::string>> out;
    for (auto it = committed_.lower_bound(prefix); it != committed_.end();
         ++it) {
      if (it->first.compare(0, prefix.size(), prefix) != 0) break;
      out.emplace_back(it->first, it->second.value);
    }
    return out;
  }

  // Direct mutation used by tests to seed inconsistent states.
  bool erase(const std::string& key) {
    std::lock_guard lock(m_);
    return committed_.erase(key) > 0;
  }

  size_t size() const {
    std::lock_guard lock(m_);
    return committed_.size();
  }

  size_t commit_count() const {
    std::lock_guard lock(m_);
    return commit_log_.size();
  }

  std::string digest() const {
    std::lock_guard lock(m_);
    Sha256 h;
    for (const auto& [key, slot] : committed_) {
      h.update(key);
      h.update("\t");
      h.update(slot.value);
      h.update("\n");
    }
    return to_hex(h.finish());
  }

  void write_snapshot(std::ostream& os) const {
    std::lock_guard lock(m_);
    for (const auto& [key, slot] : committed_) {
      Json line;
      line["key"] = key;
      line["value"] = slot.value;
      os << line.dump() << "\n";
    }
  }

 private:
  struct Versioned {
    std::string value;
    uint64_t version = 0;
  };

  mutable std::mutex m_;
  std::map<std::string, Versioned> committed_;
  std::vector<Json> commit_log_;
  uint64_t next_txn_id_ = 1;
  uint64_t next_version_ = 1;
};

/// Runs `body` in a transaction, retrying on optimistic-concurrency conflicts
/// up to `retries` times. The body returns Status; any non-conflict error
/// aborts and is passed through.
template <typename Body>
Status with_txn(TxnStore& store, int retries, Body&& body) {
  for (int attempt = 0;; ++attempt) {
    TxnHandle h = store.begin();
    Status s = body(h);
    if (!s.ok()) {
      store.abort(h);
      return s;
    }
    Status c = store.commit(h);
    if (c.ok()) return c;
    if (c.code() != Errc::conflict || attempt >= retries) return c;
    if (attempt > 2) {
      std::this_thread::sleep_for(std::chrono::microseconds(attempt));
    } else {
      std::this_thread::yield();
    }
  }
}

}  // namespace flightdeck
