#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpusforge/exam.hpp"
#include "corpusforge/langid.hpp"
#include "corpusforge/ledger.hpp"
#include "corpusforge/quality.hpp"
#include "corpusforge/store.hpp"
#include "corpusforge/types.hpp"

namespace corpusforge::engine {

struct EngineConfig {
  double length_ratio_max = qc::kDefaultLengthRatioMax;
  qc::FastThresholds fast;
  std::int64_t translate_deadline_ms = 30 * 60 * 1000;
  std::int64_t verify_deadline_ms = 10 * 60 * 1000;
  int exam_pass_threshold = exam::kDefaultPassThreshold;
  std::int64_t session_ttl_ms = 7ll * 24 * 3600 * 1000;
};

// "Translate the sentence from Chechen to Russian"
std::string translate_instruction(const Direction& d);
std::string verify_instruction(const Direction& d);

struct TaskHandle {
  TaskKind kind = TaskKind::translate;
  TaskId task;
  std::optional<AssignmentId> assignment;  // verify only
  Direction direction;
  std::string instruction;
  std::string source;
  std::optional<std::string> translation;  // verify only
  Timestamp deadline = 0;
};

struct Registration {
  store::WorkerProfile worker;
  store::Session session;
};

struct SubmissionOutcome {
  TranslationId translation;
  bool queued_for_verification = false;
  qc::AutoCheckResult check;
};

struct VerdictOutcome {
  bool finalized = false;
  std::optional<Decision> decision;
};

// Lifecycle owner for translation tasks and verification assignments. Every
// operation runs as one store write, so concurrent callers serialize there.
class TaskEngine {
 public:
  TaskEngine(store::Store& store, std::shared_ptr<const langid::Detector> detector, EngineConfig config = {},
             Clock clock = system_now);

  const EngineConfig& config() const { return config_; }
  store::Store& store() { return store_; }
  const langid::Detector& detector() const { return *detector_; }

  Registration register_worker(const std::string& name, const std::set<std::string>& langs);
  // Resolves a bearer token; unknown or expired tokens are auth errors.
  WorkerId authenticate(const std::string& token) const;
  store::WorkerProfile worker(WorkerId id) const;

  std::vector<TaskId> create_translation_tasks(std::span<const SourceId> sources, const Direction& direction);
  std::optional<TaskHandle> assign_next(WorkerId worker, TaskKind kind);
  SubmissionOutcome submit_translation(TaskId task, WorkerId worker, const std::string& text,
                                       std::int64_t elapsed_ms);
  VerdictOutcome submit_verdict(AssignmentId assignment, WorkerId worker, Verdict verdict,
                                std::int64_t elapsed_ms);

  // Requester side: installs the current exam form for its direction.
  void install_exam(const exam::ExamForm& form);
  exam::ExamForm exam_form(const Direction& direction) const;
  exam::ExamResult grade_exam(WorkerId worker, const Direction& direction, const std::string& version,
                              std::span<const exam::Label> answers);

  // Reviews the worker's fast responses so far and lifts the flag.
  void clear_flag(WorkerId worker);
  // Reverts assignments whose deadline passed. Runs implicitly before every
  // mutating operation; exposed for tests and the operator CLI.
  std::size_t sweep_expired();

 private:
  std::size_t sweep(store::Txn& txn, Timestamp now);
  void finalize_task(store::Txn& txn, store::TranslationTask task, store::TaskState to, Timestamp now);
  void record_response(store::Txn& txn, WorkerId worker, TaskKind kind, std::int64_t elapsed_ms, Timestamp now);

  store::Store& store_;
  std::shared_ptr<const langid::Detector> detector_;
  EngineConfig config_;
  Clock clock_;
};

void to_json(nlohmann::json& j, const TaskHandle& h);
void to_json(nlohmann::json& j, const SubmissionOutcome& o);
void to_json(nlohmann::json& j, const VerdictOutcome& o);

}  // namespace corpusforge::engine
