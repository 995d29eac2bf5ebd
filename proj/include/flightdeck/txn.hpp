#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "flightdeck/clock.hpp"
#include "flightdeck/error.hpp"
#include "flightdeck/json_util.hpp"

namespace flightdeck {

// ---------------------------------------------------------------------------
// Two-phase commit
// ---------------------------------------------------------------------------

enum class Vote { yes, no, timeout };

struct ParticipantBinding {
  std::string participant_id;
  std::function<Vote()> prepare;     // may throw: counted as a timeout vote
  std::function<void()> commit;      // must succeed after a yes vote
  std::function<void()> rollback;    // idempotent
};

enum class TwoPcPhase { init, preparing, committed, aborted };

struct TwoPcRecord {
  std::string txn_id;
  std::vector<std::string> participants;
  TwoPcPhase phase = TwoPcPhase::init;
  std::map<std::string, Vote> votes;
};

enum class TwoPcOutcome { committed, aborted };

/// Drives prepare across all participants, then either commits everywhere
/// (unanimous yes) or rolls back exactly the yes-voters. A participant that
/// throws during prepare is recorded as a timeout vote and forces an abort.
class TwoPhaseCoordinator {
 public:
  explicit TwoPhaseCoordinator(Clock* clock) : clock_(clock) {}

  Result<TwoPcOutcome> run(const std::string& txn_id,
                           const std::vector<ParticipantBinding>& participants,
                           int64_t vote_timeout_ns = 500 * kNsPerMs) {
    (void)vote_timeout_ns;  // participants are in-process calls; an
                            // unreachable one surfaces as a thrown error
    if (participants.empty()) {
      return Error{Errc::invalid_argument, "no participants"};
    }
    TwoPcRecord rec;
    rec.txn_id = txn_id;
    rec.phase = TwoPcPhase::preparing;
    for (const auto& p : participants) rec.participants.push_back(p.participant_id);

    bool all_yes = true;
    for (const auto& p : participants) {
      Vote v;
      try {
        v = p.prepare();
      } catch (...) {
        v = Vote::timeout;
      }
      rec.votes[p.participant_id] = v;
      if (v != Vote::yes) all_yes = false;
    }

    if (all_yes) {
      for (const auto& p : participants) p.commit();
      rec.phase = TwoPcPhase::committed;
    } else {
      for (const auto& p : participants) {
        if (rec.votes[p.participant_id] == Vote::yes) {
          try {
            p.rollback();
          } catch (...) {
            // rollback is idempotent by contract; a throwing rollback is a
            // participant bug and must not mask the abort decision
          }
        }
      }
      rec.phase = TwoPcPhase::aborted;
    }

    TwoPcOutcome outcome = all_yes ? TwoPcOutcome::committed : TwoPcOutcome::aborted;
    {
      std::lock_guard lock(m_);
      records_[txn_id] = std::move(rec);
    }
    return outcome;
  }

  std::optional<TwoPcRecord> record(const std::string& txn_id) const {
    std::lock_guard lock(m_);
    auto it = records_.find(txn_id);
    if (it == records_.end()) return std::nullopt;
    return it->second;
  }

 private:
  Clock* clock_;
  mutable std::mutex m_;
  std::map<std::string, TwoPcRecord> records_;
};

// ---------------------------------------------------------------------------
// Saga orchestration
// ---------------------------------------------------------------------------

struct StepResult {
  bool ok = true;
  std::string reason;

  static StepResult success() { return {true, {}}; }
  static StepResult failure(std::string reason) {
    return {false, std::move(reason)};
  }
};

struct SagaStep {
  std::string name;
  std::function<StepResult(Json& ctx)> action;
  std::function<void(Json& ctx)> compensation;  // idempotent
};

enum class SagaEvent { action_ok, action_failed, compensation_ok };

inline const char* saga_event_name(SagaEvent e) {
  switch (e) {
    case SagaEvent::action_ok: return "action_ok";
    case SagaEvent::action_failed: return "action_failed";
    case SagaEvent::compensation_ok: return "compensation_ok";
  }
  return "unknown";
}

inline std::optional<SagaEvent> saga_event_from(const std::string& s) {
  if (s == "action_ok") return SagaEvent::action_ok;
  if (s == "action_failed") return SagaEvent::action_failed;
  if (s == "compensation_ok") return SagaEvent::compensation_ok;
  return std::nullopt;
}

struct JournalEntry {
  uint64_t seq = 0;  // 1-based
  std::string step;
  SagaEvent event = SagaEvent::action_ok;
  int64_t ts_ns = 0;
};

struct SagaOutcome {
  enum class Kind { completed, compensated, stuck, crashed };
  Kind kind = Kind::completed;
  std::string failed_step;
  std::string reason;
  std::vector<JournalEntry> journal;
};

inline Json journal_entry_json(const std::string& saga_id,
                               const JournalEntry& e) {
  Json j;
  j["saga_id"] = saga_id;
  j["seq"] = e.seq;
  j["step_name"] = e.step;
  j["event"] = saga_event_name(e.event);
  j["ts"] = e.ts_ns;
  return j;
}

inline void journal_to_jsonl(const std::string& saga_id,
                             const std::vector<JournalEntry>& journal,
                             std::ostream& os) {
  for (const auto& e : journal) os << journal_entry_json(saga_id, e).dump() << "\n";
}

/// Executes saga steps in order, journaling each completed effect. On a step
/// failure, compensations for the previously completed steps run in reverse
/// order. A failing compensation is retried with exponential backoff; when
/// retries are exhausted the saga is parked as stuck and surfaced to the
/// error accounting rather than silently dropped.
struct SagaOptions {
  int compensation_retries = 5;
  int64_t backoff_base_ns = 10 * kNsPerMs;  // 10ms * 2^attempt
  // Test hook: stop (as if the process died) once the journal reaches this
  // many entries.
  std::optional<uint64_t> crash_after_entries;
};

class SagaOrchestrator {
 public:
  using JournalSink =
      std::function<void(const std::string& saga_id, const JournalEntry&)>;

  explicit SagaOrchestrator(Clock* clock, JournalSink sink = nullptr)
      : clock_(clock), sink_(std::move(sink)) {}

  SagaOutcome execute(const std::string& saga_id,
                      const std::vector<SagaStep>& steps, Json& ctx,
                      const SagaOptions& opts = SagaOptions()) {
    std::vector<JournalEntry> journal;
    return run_from(saga_id, steps, ctx, std::move(journal), 0, opts);
  }

  /// Continues an execution from a journal written by a previous attempt.
  /// Journaled actions and compensations are not re-executed.
  Result<SagaOutcome> resume(const std::string& saga_id,
                             const std::vector<SagaStep>& steps, Json& ctx,
                             const std::vector<JournalEntry>& journal,
                             const SagaOptions& opts = SagaOptions()) {
    // Validate that the journal is a prefix of some execution of `steps`.
    size_t actions_ok = 0;
    std::optional<size_t> failed_index;
    size_t compensations = 0;
    uint64_t expect_seq = 1;
    for (const auto& e : journal) {
      if (e.seq != expect_seq++) {
        return Error{Errc::rejected_journal, "non-contiguous journal"};
      }
      switch (e.event) {
        case SagaEvent::action_ok:
          if (failed_index || actions_ok >= steps.size() ||
              steps[actions_ok].name != e.step) {
            return Error{Errc::rejected_journal, "unexpected action_ok"};
          }
          ++actions_ok;
          break;
        case SagaEvent::action_failed:
          if (failed_index || actions_ok >= steps.size() ||
              steps[actions_ok].name != e.step) {
            return Error{Errc::rejected_journal, "unexpected action_failed"};
          }
          failed_index = actions_ok;
          break;
        case SagaEvent::compensation_ok: {
          if (!failed_index) {
            return Error{Errc::rejected_journal,
                         "compensation without failure"};
          }
          size_t expect_step = actions_ok - compensations - 1;
          if (compensations >= actions_ok ||
              steps[expect_step].name != e.step) {
            return Error{Errc::rejected_journal, "compensation out of order"};
          }
          ++compensations;
          break;
        }
      }
    }
    std::vector<JournalEntry> copy = journal;
    if (!failed_index) {
      return run_from(saga_id, steps, ctx, std::move(copy), actions_ok, opts);
    }
    return compensate_from(saga_id, steps, ctx, std::move(copy), *failed_index,
                           actions_ok - compensations, "resumed failure", opts);
  }

  uint64_t stuck_count() const { return stuck_.load(); }

 private:
  SagaOutcome run_from(const std::string& saga_id,
                       const std::vector<SagaStep>& steps, Json& ctx,
                       std::vector<JournalEntry> journal, size_t cursor,
                       const SagaOptions& opts) {
    for (size_t i = cursor; i < steps.size(); ++i) {
      StepResult r;
      try {
        r = steps[i].action(ctx);
      } catch (const std::exception& e) {
        r = StepResult::failure(e.what());
      } catch (...) {
        r = StepResult::failure("action threw");
      }
      append(saga_id, journal, steps[i].name,
             r.ok ? SagaEvent::action_ok : SagaEvent::action_failed);
      if (crashed(journal, opts)) return crash_outcome(std::move(journal));
      if (!r.ok) {
        return compensate_from(saga_id, steps, ctx, std::move(journal), i, i,
                               r.reason, opts);
      }
    }
    SagaOutcome out;
    out.kind = SagaOutcome::Kind::completed;
    out.journal = std::move(journal);
    return out;
  }

  SagaOutcome compensate_from(const std::string& saga_id,
                              const std::vector<SagaStep>& steps, Json& ctx,
                              std::vector<JournalEntry> journal,
                              size_t failed_index, size_t next_to_compensate,
                              const std::string& reason, const SagaOptions& opts) {
    for (size_t k = next_to_compensate; k-- > 0;) {
      if (!compensate_with_retry(steps[k], ctx, opts)) {
        stuck_.fetch_add(1);
        SagaOutcome out;
        out.kind = SagaOutcome::Kind::stuck;
        out.failed_step = steps[failed_index].name;
        out.reason = "compensation failed for step " + steps[k].name;
        out.journal = std::move(journal);
        return out;
      }
      append(saga_id, journal, steps[k].name, SagaEvent::compensation_ok);
      if (crashed(journal, opts)) return crash_outcome(std::move(journal));
    }
    SagaOutcome out;
    out.kind = SagaOutcome::Kind::compensated;
    out.failed_step = steps[failed_index].name;
    out.reason = reason;
    out.journal = std::move(journal);
    return out;
  }

  bool compensate_with_retry(const SagaStep& step, Json& ctx,
                             const SagaOptions& opts) {
    for (int attempt = 0; attempt <= opts.compensation_retries; ++attempt) {
      if (attempt > 0) {
        clock_->sleep_for_ns(opts.backoff_base_ns * (int64_t(1) << attempt));
      }
      try {
        step.compensation(ctx);
        return true;
      } catch (...) {
        // retry
      }
    }
    return false;
  }

  void append(const std::string& saga_id, std::vector<JournalEntry>& journal,
              const std::string& step, SagaEvent event) {
    JournalEntry e;
    e.seq = journal.size() + 1;
    e.step = step;
    e.event = event;
    e.ts_ns = clock_->now_ns();
    journal.push_back(e);
    if (sink_) sink_(saga_id, journal.back());
  }

  static bool crashed(const std::vector<JournalEntry>& journal,
                      const SagaOptions& opts) {
    return opts.crash_after_entries &&
           journal.size() >= *opts.crash_after_entries;
  }

  static SagaOutcome crash_outcome(std::vector<JournalEntry> journal) {
    SagaOutcome out;
    out.kind = SagaOutcome::Kind::crashed;
    out.journal = std::move(journal);
    return out;
  }

  Clock* clock_;
  JournalSink sink_;
  std::atomic<uint64_t> stuck_{0};
};

}  // namespace flightdeck
