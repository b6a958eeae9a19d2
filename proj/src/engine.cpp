#include "corpusforge/engine.hpp"

#include <random>

#include <fmt/format.h>

#include "corpusforge/error.hpp"
#include "corpusforge/text.hpp"

namespace corpusforge::engine {

using store::SourceStatus;
using store::TaskState;

std::string translate_instruction(const Direction& d) {
  return fmt::format("Translate the sentence from {} to {}", language_name(d.src), language_name(d.tgt));
}

std::string verify_instruction(const Direction& d) {
  return fmt::format("Is this {} translation of the {} sentence good or bad?", language_name(d.tgt),
                     language_name(d.src));
}

namespace {

std::string new_token() {
  static thread_local std::random_device rd;
  std::uniform_int_distribution<std::uint64_t> dist;
  std::mt19937_64 gen((std::uint64_t{rd()} << 32) ^ rd());
  return fmt::format("{:016x}{:016x}", dist(gen), dist(gen));
}

bool speaks(const store::WorkerProfile& w, const Direction& d) {
  return w.langs.count(d.src) && w.langs.count(d.tgt);
}

const store::WorkerProfile& require_worker(const store::State& s, WorkerId id) {
  auto it = s.workers.find(id);
  if (it == s.workers.end()) fail(ErrorKind::auth, "unknown worker");
  return it->second;
}

void move_task(store::TranslationTask& t, TaskState to) {
  if (!store::transition_allowed(t.state, to))
    fail(ErrorKind::integrity, fmt::format("illegal task transition {} -> {}", store::to_string(t.state),
                                           store::to_string(to)));
  t.state = to;
}

bool is_lang_code(const std::string& s) {
  if (s.size() < 2 || s.size() > 8) return false;
  for (char c : s)
    if (c < 'a' || c > 'z') return false;
  return true;
}

}  // namespace

TaskEngine::TaskEngine(store::Store& store, std::shared_ptr<const langid::Detector> detector,
                       EngineConfig config, Clock clock)
    : store_(store), detector_(std::move(detector)), config_(config), clock_(std::move(clock)) {
  if (!detector_) fail(ErrorKind::configuration, "task engine needs a language detector");
  if (!clock_) clock_ = system_now;
}

Registration TaskEngine::register_worker(const std::string& raw_name, const std::set<std::string>& langs) {
  const auto name = text::trim(raw_name);
  if (name.empty()) fail(ErrorKind::input, "worker name is empty");
  if (langs.empty()) fail(ErrorKind::input, "declare at least one language");
  for (const auto& l : langs)
    if (!is_lang_code(l)) fail(ErrorKind::input, "malformed language code '" + l + "'");
  const auto now = clock_();
  return store_.write([&](store::Txn& txn) {
    if (txn.state().find_worker(name)) fail(ErrorKind::conflict, "worker name '" + name + "' is taken");
    store::WorkerProfile w;
    w.id = WorkerId{txn.allocate_id()};
    w.name = name;
    w.langs = langs;
    w.registered_at = now;
    txn.put(w);
    store::Session s{new_token(), w.id, now, now + config_.session_ttl_ms};
    txn.put(s);
    return Registration{w, s};
  });
}

WorkerId TaskEngine::authenticate(const std::string& token) const {
  const auto now = clock_();
  return store_.read([&](const store::State& s) {
    auto it = s.sessions.find(token);
    if (it == s.sessions.end()) fail(ErrorKind::auth, "unknown session token");
    if (it->second.expires_at <= now) fail(ErrorKind::auth, "session expired");
    return it->second.worker;
  });
}

store::WorkerProfile TaskEngine::worker(WorkerId id) const {
  return store_.read([&](const store::State& s) { return require_worker(s, id); });
}

std::vector<TaskId> TaskEngine::create_translation_tasks(std::span<const SourceId> sources,
                                                         const Direction& direction) {
  if (direction.src == direction.tgt) fail(ErrorKind::input, "direction languages must differ");
  const auto now = clock_();
  return store_.write([&](store::Txn& txn) {
    const auto& s = txn.state();
    std::set<SourceId> batch;
    for (auto id : sources) {
      auto it = s.sources.find(id);
      if (it == s.sources.end()) fail(ErrorKind::input, fmt::format("unknown source {}", id.value));
      if (it->second.lang != direction.src)
        fail(ErrorKind::input, fmt::format("source {} is '{}', not '{}'", id.value, it->second.lang, direction.src));
      if (it->second.status != SourceStatus::pool || !batch.insert(id).second)
        fail(ErrorKind::input, fmt::format("source {} is already tasked", id.value));
    }
    txn.add_direction(direction);
    std::vector<TaskId> created;
    created.reserve(sources.size());
    for (auto id : sources) {
      auto src = s.sources.at(id);
      src.status = SourceStatus::tasked;
      txn.put(src);
      store::TranslationTask t;
      t.id = TaskId{txn.allocate_id()};
      t.source = id;
      t.direction = direction;
      t.created_at = now;
      txn.put(t);
      created.push_back(t.id);
    }
    return created;
  });
}

std::size_t TaskEngine::sweep(store::Txn& txn, Timestamp now) {
  const auto& s = txn.state();
  std::size_t reverted = 0;
  while (!s.task_deadlines.empty() && s.task_deadlines.begin()->first < now) {
    auto t = s.tasks.at(s.task_deadlines.begin()->second);
    move_task(t, TaskState::open);
    t.assigned_to.reset();
    t.deadline = 0;
    txn.put(t);
    ++reverted;
  }
  while (!s.assignment_deadlines.empty() && s.assignment_deadlines.begin()->first < now) {
    auto a = s.assignments.at(s.assignment_deadlines.begin()->second);
    a.worker.reset();
    a.reserved_until = 0;
    txn.put(a);
    ++reverted;
  }
  return reverted;
}

std::size_t TaskEngine::sweep_expired() {
  const auto now = clock_();
  return store_.write([&](store::Txn& txn) { return sweep(txn, now); });
}

std::optional<TaskHandle> TaskEngine::assign_next(WorkerId worker_id, TaskKind kind) {
  const auto now = clock_();
  return store_.write([&](store::Txn& txn) -> std::optional<TaskHandle> {
    sweep(txn, now);
    const auto& s = txn.state();
    const auto& w = require_worker(s, worker_id);
    if (w.flag) return std::nullopt;

    if (kind == TaskKind::translate) {
      // Ids grow with creation time, so the first eligible id is the oldest.
      for (auto id : s.open_tasks) {
        const auto& cand = s.tasks.at(id);
        if (!speaks(w, cand.direction)) continue;
        auto t = cand;
        move_task(t, TaskState::assigned);
        t.assigned_to = worker_id;
        t.deadline = now + config_.translate_deadline_ms;
        txn.put(t);
        TaskHandle h;
        h.kind = kind;
        h.task = t.id;
        h.direction = t.direction;
        h.instruction = translate_instruction(t.direction);
        h.source = s.sources.at(t.source).text;
        h.deadline = t.deadline;
        return h;
      }
      return std::nullopt;
    }

    for (auto id : s.open_assignments) {
      const auto& cand = s.assignments.at(id);
      const auto& tr = s.translations.at(cand.translation);
      if (tr.worker == worker_id) continue;
      const auto& task = s.tasks.at(tr.task);
      if (!speaks(w, task.direction) || !s.passed_exams.count({worker_id, task.direction.code()})) continue;
      bool involved = false;
      for (auto other : s.assignments_by_translation.at(tr.id))
        if (s.assignments.at(other).worker == worker_id) involved = true;
      if (involved) continue;
      auto a = cand;
      a.worker = worker_id;
      a.reserved_until = now + config_.verify_deadline_ms;
      txn.put(a);
      TaskHandle h;
      h.kind = kind;
      h.task = task.id;
      h.assignment = a.id;
      h.direction = task.direction;
      h.instruction = verify_instruction(task.direction);
      h.source = s.sources.at(task.source).text;
      h.translation = tr.text;
      h.deadline = a.reserved_until;
      return h;
    }
    return std::nullopt;
  });
}

void TaskEngine::record_response(store::Txn& txn, WorkerId worker_id, TaskKind kind, std::int64_t elapsed_ms,
                                 Timestamp now) {
  txn.add_response(worker_id, {kind, elapsed_ms});
  auto w = txn.state().workers.at(worker_id);
  if (w.flag) return;
  const auto& history = txn.state().histories.at(worker_id);
  const auto recent = std::span<const qc::Response>(history).subspan(std::min(w.cleared_through, history.size()));
  if (auto flag = qc::flag_fast_responses(worker_id, recent, config_.fast, now)) {
    w.flag = *flag;
    txn.put(w);
  }
}

void TaskEngine::finalize_task(store::Txn& txn, store::TranslationTask task, TaskState to, Timestamp now) {
  move_task(task, to);
  task.finalized_at = now;
  txn.put(task);
  auto src = txn.state().sources.at(task.source);
  src.status = SourceStatus::exhausted;
  txn.put(src);
}

SubmissionOutcome TaskEngine::submit_translation(TaskId task_id, WorkerId worker_id, const std::string& text,
                                                 std::int64_t elapsed_ms) {
  if (text.empty()) fail(ErrorKind::input, "translation text is empty");
  if (elapsed_ms < 0) fail(ErrorKind::input, "elapsed_ms must be non-negative");
  const auto now = clock_();
  return store_.write([&](store::Txn& txn) {
    sweep(txn, now);
    const auto& s = txn.state();
    require_worker(s, worker_id);
    auto it = s.tasks.find(task_id);
    if (it == s.tasks.end()) fail(ErrorKind::not_found, fmt::format("unknown task {}", task_id.value));
    auto task = it->second;
    if (task.state != TaskState::assigned || task.assigned_to != worker_id)
      fail(ErrorKind::permission, fmt::format("task {} is not assigned to this worker", task_id.value));

    const auto& source = s.sources.at(task.source);
    store::Translation tr;
    tr.id = TranslationId{txn.allocate_id()};
    tr.task = task.id;
    tr.worker = worker_id;
    tr.text = text;
    tr.elapsed_ms = elapsed_ms;
    tr.submitted_at = now;
    tr.check = qc::auto_check(text, source.text, task.direction, *detector_, config_.length_ratio_max);
    txn.put(tr);

    move_task(task, TaskState::submitted);
    task.translation = tr.id;
    task.deadline = 0;
    if (tr.check.passed) {
      move_task(task, TaskState::in_verification);
      txn.put(task);
      for (int i = 0; i < 3; ++i) {
        store::VerificationAssignment a;
        a.id = AssignmentId{txn.allocate_id()};
        a.translation = tr.id;
        txn.put(a);
      }
      txn.record_translation_payment(worker_id, now);
    } else {
      finalize_task(txn, task, TaskState::auto_rejected, now);
    }
    record_response(txn, worker_id, TaskKind::translate, elapsed_ms, now);
    return SubmissionOutcome{tr.id, tr.check.passed, tr.check};
  });
}

VerdictOutcome TaskEngine::submit_verdict(AssignmentId assignment_id, WorkerId worker_id, Verdict verdict,
                                          std::int64_t elapsed_ms) {
  if (elapsed_ms < 0) fail(ErrorKind::input, "elapsed_ms must be non-negative");
  const auto now = clock_();
  return store_.write([&](store::Txn& txn) {
    sweep(txn, now);
    const auto& s = txn.state();
    require_worker(s, worker_id);
    auto it = s.assignments.find(assignment_id);
    if (it == s.assignments.end())
      fail(ErrorKind::not_found, fmt::format("unknown assignment {}", assignment_id.value));
    auto a = it->second;
    if (a.verdict) fail(ErrorKind::conflict, fmt::format("assignment {} already has a verdict", assignment_id.value));
    if (a.worker != worker_id)
      fail(ErrorKind::permission, fmt::format("assignment {} is not reserved by this worker", assignment_id.value));
    a.verdict = verdict;
    a.elapsed_ms = elapsed_ms;
    a.judged_at = now;
    txn.put(a);
    txn.count_verdict_and_settle(worker_id, now);
    record_response(txn, worker_id, TaskKind::verify, elapsed_ms, now);

    std::vector<Verdict> verdicts;
    for (auto id : s.assignments_by_translation.at(a.translation))
      if (const auto& v = s.assignments.at(id).verdict) verdicts.push_back(*v);
    if (verdicts.size() < 3) return VerdictOutcome{};
    const auto decision = qc::aggregate_verdicts(verdicts);
    const auto& task = s.tasks.at(s.translations.at(a.translation).task);
    finalize_task(txn, task, decision == Decision::accepted ? TaskState::accepted : TaskState::rejected, now);
    return VerdictOutcome{true, decision};
  });
}

void TaskEngine::install_exam(const exam::ExamForm& form) {
  if (form.items.size() != exam::kItems) fail(ErrorKind::input, "exam form must have exactly 10 items");
  if (form.version.empty()) fail(ErrorKind::input, "exam form needs a version");
  store_.write([&](store::Txn& txn) {
    txn.add_direction(form.direction);
    txn.put(form);
  });
}

exam::ExamForm TaskEngine::exam_form(const Direction& direction) const {
  return store_.read([&](const store::State& s) {
    auto it = s.exam_forms.find(direction.code());
    if (it == s.exam_forms.end()) fail(ErrorKind::not_found, "no exam installed for " + direction.code());
    return it->second;
  });
}

exam::ExamResult TaskEngine::grade_exam(WorkerId worker_id, const Direction& direction, const std::string& version,
                                        std::span<const exam::Label> answers) {
  const auto now = clock_();
  return store_.write([&](store::Txn& txn) {
    const auto& s = txn.state();
    const auto& w = require_worker(s, worker_id);
    if (!speaks(w, direction))
      fail(ErrorKind::permission, "worker has not declared both languages of " + direction.code());
    auto it = s.exam_forms.find(direction.code());
    if (it == s.exam_forms.end()) fail(ErrorKind::not_found, "no exam installed for " + direction.code());
    const auto& form = it->second;
    if (version != form.version) fail(ErrorKind::conflict, "exam version '" + version + "' is not current");
    if (s.exam_attempts.count({worker_id, direction.code(), form.version}))
      fail(ErrorKind::conflict, "exam " + form.version + " was already attempted");
    exam::ExamResult r;
    r.worker = worker_id;
    r.direction = direction;
    r.form_version = form.version;
    r.score = exam::score_answers(form, answers);
    r.passed = r.score >= config_.exam_pass_threshold;
    r.taken_at = now;
    txn.add(r);
    return r;
  });
}

void TaskEngine::clear_flag(WorkerId worker_id) {
  store_.write([&](store::Txn& txn) {
    auto w = require_worker(txn.state(), worker_id);
    auto h = txn.state().histories.find(worker_id);
    w.cleared_through = h == txn.state().histories.end() ? 0 : h->second.size();
    w.flag.reset();
    txn.put(w);
  });
}

void to_json(nlohmann::json& j, const TaskHandle& h) {
  j = {{"kind", to_string(h.kind)},
       {"task_id", h.task},
       {"direction", h.direction},
       {"instruction", h.instruction},
       {"source", h.source},
       {"deadline", h.deadline}};
  if (h.assignment) j["assignment_id"] = *h.assignment;
  if (h.translation) j["translation"] = *h.translation;
}

void to_json(nlohmann::json& j, const SubmissionOutcome& o) {
  j = {{"translation_id", o.translation},
       {"outcome", o.queued_for_verification ? "queued_for_verification" : "auto_rejected"},
       {"check", o.check}};
  if (o.check.failed_check) j["reason"] = qc::to_string(*o.check.failed_check);
}

void to_json(nlohmann::json& j, const VerdictOutcome& o) {
  j = {{"outcome", o.finalized ? "finalized" : "recorded"}};
  if (o.decision) j["decision"] = to_string(*o.decision);
}

}  // namespace corpusforge::engine
