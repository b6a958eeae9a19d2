#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <tuple>
#include <type_traits>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "corpusforge/error.hpp"
#include "corpusforge/exam.hpp"
#include "corpusforge/ledger.hpp"
#include "corpusforge/quality.hpp"
#include "corpusforge/types.hpp"

namespace corpusforge::store {

enum class SourceStatus { pool, tasked, exhausted };

struct SourceSentence {
  SourceId id;
  std::string text;
  std::string lang;
  std::string origin;
  std::string normalized;
  SourceStatus status = SourceStatus::pool;
};

enum class TaskState { open, assigned, submitted, auto_rejected, in_verification, accepted, rejected };

std::string_view to_string(TaskState s);
std::string_view to_string(SourceStatus s);
// The declared lifecycle edges, including assigned -> open on expiry.
bool transition_allowed(TaskState from, TaskState to);
bool is_final(TaskState s);

struct TranslationTask {
  TaskId id;
  SourceId source;
  Direction direction;
  TaskState state = TaskState::open;
  std::optional<WorkerId> assigned_to;
  Timestamp deadline = 0;
  Timestamp created_at = 0;
  std::optional<TranslationId> translation;
  std::optional<Timestamp> finalized_at;
};

struct Translation {
  TranslationId id;
  TaskId task;
  WorkerId worker;
  std::string text;
  std::int64_t elapsed_ms = 0;
  Timestamp submitted_at = 0;
  qc::AutoCheckResult check;
};

struct VerificationAssignment {
  AssignmentId id;
  TranslationId translation;
  std::optional<WorkerId> worker;
  Timestamp reserved_until = 0;
  std::optional<Verdict> verdict;
  std::optional<std::int64_t> elapsed_ms;
  std::optional<Timestamp> judged_at;
};

struct WorkerProfile {
  WorkerId id;
  std::string name;
  std::set<std::string> langs;
  Timestamp registered_at = 0;
  std::optional<qc::TrustFlag> flag;
  // Fast responses before this many history entries were reviewed and cleared.
  std::size_t cleared_through = 0;
};

struct Session {
  std::string token;
  WorkerId worker;
  Timestamp issued_at = 0;
  Timestamp expires_at = 0;
};

// Whole-pipeline state plus derived lookup indexes. Every mutation goes
// through put()/add() so the indexes stay in step with the rows.
class State {
 public:
  std::map<SourceId, SourceSentence> sources;
  std::map<TaskId, TranslationTask> tasks;
  std::map<TranslationId, Translation> translations;
  std::map<AssignmentId, VerificationAssignment> assignments;
  std::map<WorkerId, WorkerProfile> workers;
  std::map<WorkerId, std::vector<qc::Response>> histories;
  std::map<std::string, Session> sessions;
  std::map<std::string, exam::ExamForm> exam_forms;  // direction code -> current form
  std::vector<exam::ExamResult> exam_results;
  std::vector<Direction> directions;                 // insertion order
  ledger::Ledger ledger;
  std::uint64_t next_id = 1;

  // Indexes.
  std::unordered_set<std::string> normalized_forms;  // lang + '\x1f' + normalized
  std::map<std::string, WorkerId> worker_by_name;
  std::set<TaskId> open_tasks;
  std::set<std::pair<Timestamp, TaskId>> task_deadlines;
  std::set<AssignmentId> open_assignments;
  std::set<std::pair<Timestamp, AssignmentId>> assignment_deadlines;
  std::map<TranslationId, std::vector<AssignmentId>> assignments_by_translation;
  std::set<std::pair<WorkerId, std::string>> passed_exams;
  std::set<std::tuple<WorkerId, std::string, std::string>> exam_attempts;

  std::uint64_t allocate_id() { return next_id++; }

  void put(const SourceSentence& row);
  void put(const TranslationTask& row);
  void put(const Translation& row);
  void put(const VerificationAssignment& row);
  void put(const WorkerProfile& row);
  void put(const Session& row);
  void put(const exam::ExamForm& form);
  void add(const exam::ExamResult& result);
  void add_response(WorkerId worker, std::size_t index, const qc::Response& response);
  void add_direction(const Direction& d);
  bool has_direction(const Direction& d) const;

  bool has_normalized(const std::string& lang, const std::string& normalized) const;
  const WorkerProfile* find_worker(std::string_view name) const;
};

nlohmann::json to_json(const State& state);
State state_from_json(const nlohmann::json& j);

// Write transaction handle. Row writes go to the state and, when the store
// is file-backed, to the pending journal batch.
class Txn {
 public:
  Txn(State& state, bool journaling) : state_(state), journaling_(journaling) {}

  const State& state() const { return state_; }
  std::uint64_t allocate_id();

  void put(const SourceSentence& row);
  void put(const TranslationTask& row);
  void put(const Translation& row);
  void put(const VerificationAssignment& row);
  void put(const WorkerProfile& row);
  void put(const Session& row);
  void put(const exam::ExamForm& form);
  void add(const exam::ExamResult& result);
  void add_response(WorkerId worker, const qc::Response& response);
  void add_direction(const Direction& d);

  ledger::CostEntry record_translation_payment(WorkerId worker, Timestamp at);
  std::vector<ledger::CostEntry> count_verdict_and_settle(WorkerId worker, Timestamp at);

  // Prices come from configuration, so they are not journaled.
  void set_prices(const ledger::PriceSheet& prices) { state_.ledger.set_prices(prices); }

  std::vector<std::string>& journal() { return journal_; }

 private:
  void log(std::string_view type, nlohmann::json row);

  State& state_;
  bool journaling_;
  std::vector<std::string> journal_;
};

struct StoreOptions {
  bool fsync = false;
  std::uint64_t checkpoint_bytes = 64ull << 20;  // compact the journal past this size
};

// System of record. Single writer, many readers: write() runs under an
// exclusive lock and appends its journal batch before releasing it, read()
// sees a consistent state under a shared lock.
class Store {
 public:
  Store();  // in-memory only
  explicit Store(std::filesystem::path file, StoreOptions options = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  template <class F>
  decltype(auto) read(F&& f) const {
    std::shared_lock lock(mutex_);
    return f(static_cast<const State&>(state_));
  }

  template <class F>
  decltype(auto) write(F&& f) {
    std::unique_lock lock(mutex_);
    Txn txn(state_, journal_ != nullptr);
    // Rows already applied when f throws stay applied, so they are journaled
    // too and the file never lags the memory image.
    try {
      if constexpr (std::is_void_v<decltype(f(txn))>) {
        f(txn);
        commit(txn);
      } else {
        decltype(auto) result = f(txn);
        commit(txn);
        return result;
      }
    } catch (const Error&) {
      commit(txn);
      throw;
    }
  }

  // Self-describing byte image with version header and CRC32 trailer.
  std::string snapshot() const;
  void restore(std::string_view bytes);
  // Persists a snapshot atomically and truncates the journal.
  void checkpoint();
  bool persistent() const { return !path_.empty(); }

 private:
  void commit(Txn& txn);
  void open_journal();
  void replay_journal();
  void checkpoint_locked();

  mutable std::shared_mutex mutex_;
  State state_;
  std::filesystem::path path_;
  StoreOptions options_;
  std::FILE* journal_ = nullptr;
  std::uint64_t journal_bytes_ = 0;
};

std::string encode_snapshot(const State& state);
State decode_snapshot(std::string_view bytes);

}  // namespace corpusforge::store
