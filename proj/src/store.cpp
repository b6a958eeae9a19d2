#include "corpusforge/store.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <unistd.h>
#include <zlib.h>

#include "corpusforge/error.hpp"

namespace corpusforge::store {

using nlohmann::json;

std::string_view to_string(TaskState s) {
  switch (s) {
    case TaskState::open: return "open";
    case TaskState::assigned: return "assigned";
    case TaskState::submitted: return "submitted";
    case TaskState::auto_rejected: return "auto_rejected";
    case TaskState::in_verification: return "in_verification";
    case TaskState::accepted: return "accepted";
    case TaskState::rejected: return "rejected";
  }
  return "unknown";
}

std::string_view to_string(SourceStatus s) {
  switch (s) {
    case SourceStatus::pool: return "pool";
    case SourceStatus::tasked: return "tasked";
    case SourceStatus::exhausted: return "exhausted";
  }
  return "unknown";
}

bool transition_allowed(TaskState from, TaskState to) {
  switch (from) {
    case TaskState::open: return to == TaskState::assigned;
    case TaskState::assigned: return to == TaskState::open || to == TaskState::submitted;
    case TaskState::submitted: return to == TaskState::auto_rejected || to == TaskState::in_verification;
    case TaskState::in_verification: return to == TaskState::accepted || to == TaskState::rejected;
    case TaskState::auto_rejected:
    case TaskState::accepted:
    case TaskState::rejected: return false;
  }
  return false;
}

bool is_final(TaskState s) {
  return s == TaskState::auto_rejected || s == TaskState::accepted || s == TaskState::rejected;
}

namespace {

template <class E, std::size_t N>
E enum_from(const json& j, const std::array<E, N>& values, std::string_view what) {
  const auto s = j.get<std::string>();
  for (E v : values)
    if (to_string(v) == s) return v;
  fail(ErrorKind::integrity, fmt::format("unknown {} '{}'", what, s));
}

constexpr std::array kTaskStates = {TaskState::open,          TaskState::assigned,  TaskState::submitted,
                                    TaskState::auto_rejected, TaskState::in_verification,
                                    TaskState::accepted,      TaskState::rejected};
constexpr std::array kSourceStatuses = {SourceStatus::pool, SourceStatus::tasked, SourceStatus::exhausted};

template <class T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) return it->get<T>();
  return std::nullopt;
}

std::string normalized_key(const std::string& lang, const std::string& normalized) {
  return lang + '\x1f' + normalized;
}

}  // namespace

// --- JSON row encodings -----------------------------------------------------

void to_json(json& j, const SourceSentence& s) {
  j = {{"id", s.id},         {"text", s.text},     {"lang", s.lang},
       {"origin", s.origin}, {"normalized", s.normalized}, {"status", to_string(s.status)}};
}
void from_json(const json& j, SourceSentence& s) {
  s.id = j.at("id").get<SourceId>();
  s.text = j.at("text").get<std::string>();
  s.lang = j.at("lang").get<std::string>();
  s.origin = j.at("origin").get<std::string>();
  s.normalized = j.at("normalized").get<std::string>();
  s.status = enum_from(j.at("status"), kSourceStatuses, "source status");
}

void to_json(json& j, const TranslationTask& t) {
  j = {{"id", t.id}, {"source", t.source}, {"direction", t.direction}, {"state", to_string(t.state)},
       {"deadline", t.deadline}, {"created_at", t.created_at}};
  put_opt(j, "assigned_to", t.assigned_to);
  put_opt(j, "translation", t.translation);
  put_opt(j, "finalized_at", t.finalized_at);
}
void from_json(const json& j, TranslationTask& t) {
  t.id = j.at("id").get<TaskId>();
  t.source = j.at("source").get<SourceId>();
  t.direction = j.at("direction").get<Direction>();
  t.state = enum_from(j.at("state"), kTaskStates, "task state");
  t.deadline = j.at("deadline").get<Timestamp>();
  t.created_at = j.at("created_at").get<Timestamp>();
  t.assigned_to = get_opt<WorkerId>(j, "assigned_to");
  t.translation = get_opt<TranslationId>(j, "translation");
  t.finalized_at = get_opt<Timestamp>(j, "finalized_at");
}

void to_json(json& j, const Translation& t) {
  j = {{"id", t.id},     {"task", t.task},         {"worker", t.worker},       {"text", t.text},
       {"elapsed_ms", t.elapsed_ms}, {"submitted_at", t.submitted_at}, {"check", t.check}};
}
void from_json(const json& j, Translation& t) {
  t.id = j.at("id").get<TranslationId>();
  t.task = j.at("task").get<TaskId>();
  t.worker = j.at("worker").get<WorkerId>();
  t.text = j.at("text").get<std::string>();
  t.elapsed_ms = j.at("elapsed_ms").get<std::int64_t>();
  t.submitted_at = j.at("submitted_at").get<Timestamp>();
  t.check = j.at("check").get<qc::AutoCheckResult>();
}

void to_json(json& j, const VerificationAssignment& a) {
  j = {{"id", a.id}, {"translation", a.translation}, {"reserved_until", a.reserved_until}};
  put_opt(j, "worker", a.worker);
  if (a.verdict) j["verdict"] = to_string(*a.verdict);
  put_opt(j, "elapsed_ms", a.elapsed_ms);
  put_opt(j, "judged_at", a.judged_at);
}
void from_json(const json& j, VerificationAssignment& a) {
  a.id = j.at("id").get<AssignmentId>();
  a.translation = j.at("translation").get<TranslationId>();
  a.reserved_until = j.at("reserved_until").get<Timestamp>();
  a.worker = get_opt<WorkerId>(j, "worker");
  a.verdict.reset();
  if (auto v = get_opt<std::string>(j, "verdict")) a.verdict = parse_verdict(*v);
  a.elapsed_ms = get_opt<std::int64_t>(j, "elapsed_ms");
  a.judged_at = get_opt<Timestamp>(j, "judged_at");
}

void to_json(json& j, const WorkerProfile& w) {
  j = {{"id", w.id}, {"name", w.name}, {"langs", w.langs}, {"registered_at", w.registered_at},
       {"cleared_through", w.cleared_through}};
  put_opt(j, "flag", w.flag);
}
void from_json(const json& j, WorkerProfile& w) {
  w.id = j.at("id").get<WorkerId>();
  w.name = j.at("name").get<std::string>();
  w.langs = j.at("langs").get<std::set<std::string>>();
  w.registered_at = j.at("registered_at").get<Timestamp>();
  w.cleared_through = j.value("cleared_through", std::size_t{0});
  w.flag = get_opt<qc::TrustFlag>(j, "flag");
}

void to_json(json& j, const Session& s) {
  j = {{"token", s.token}, {"worker", s.worker}, {"issued_at", s.issued_at}, {"expires_at", s.expires_at}};
}
void from_json(const json& j, Session& s) {
  s.token = j.at("token").get<std::string>();
  s.worker = j.at("worker").get<WorkerId>();
  s.issued_at = j.at("issued_at").get<Timestamp>();
  s.expires_at = j.at("expires_at").get<Timestamp>();
}

json response_json(const qc::Response& r) { return {{"kind", to_string(r.kind)}, {"elapsed_ms", r.elapsed_ms}}; }
qc::Response response_from(const json& j) {
  return {parse_task_kind(j.at("kind").get<std::string>()), j.at("elapsed_ms").get<std::int64_t>()};
}

// --- State ------------------------------------------------------------------

void State::put(const SourceSentence& row) {
  normalized_forms.insert(normalized_key(row.lang, row.normalized));
  sources[row.id] = row;
}

void State::put(const TranslationTask& row) {
  if (auto it = tasks.find(row.id); it != tasks.end()) {
    open_tasks.erase(row.id);
    task_deadlines.erase({it->second.deadline, row.id});
  }
  if (row.state == TaskState::open) open_tasks.insert(row.id);
  if (row.state == TaskState::assigned) task_deadlines.insert({row.deadline, row.id});
  tasks[row.id] = row;
}

void State::put(const Translation& row) { translations[row.id] = row; }

void State::put(const VerificationAssignment& row) {
  if (auto it = assignments.find(row.id); it != assignments.end()) {
    open_assignments.erase(row.id);
    assignment_deadlines.erase({it->second.reserved_until, row.id});
  } else {
    assignments_by_translation[row.translation].push_back(row.id);
  }
  if (!row.verdict && !row.worker) open_assignments.insert(row.id);
  if (!row.verdict && row.worker) assignment_deadlines.insert({row.reserved_until, row.id});
  assignments[row.id] = row;
}

void State::put(const WorkerProfile& row) {
  worker_by_name[row.name] = row.id;
  workers[row.id] = row;
}

void State::put(const Session& row) { sessions[row.token] = row; }

void State::put(const exam::ExamForm& form) { exam_forms[form.direction.code()] = form; }

void State::add(const exam::ExamResult& r) {
  if (!exam_attempts.insert({r.worker, r.direction.code(), r.form_version}).second) return;
  exam_results.push_back(r);
  if (r.passed) passed_exams.insert({r.worker, r.direction.code()});
}

void State::add_response(WorkerId worker, std::size_t index, const qc::Response& response) {
  auto& h = histories[worker];
  if (index < h.size()) return;  // already applied
  if (index != h.size()) fail(ErrorKind::integrity, "response history out of sequence");
  h.push_back(response);
}

void State::add_direction(const Direction& d) {
  if (!has_direction(d)) directions.push_back(d);
}

bool State::has_direction(const Direction& d) const {
  return std::find(directions.begin(), directions.end(), d) != directions.end();
}

bool State::has_normalized(const std::string& lang, const std::string& normalized) const {
  return normalized_forms.count(normalized_key(lang, normalized)) > 0;
}

const WorkerProfile* State::find_worker(std::string_view name) const {
  auto it = worker_by_name.find(std::string(name));
  return it == worker_by_name.end() ? nullptr : &workers.at(it->second);
}

json to_json(const State& s) {
  json j;
  auto rows = [](const auto& table) {
    json a = json::array();
    for (const auto& [k, v] : table) a.push_back(v);
    return a;
  };
  j["sources"] = rows(s.sources);
  j["tasks"] = rows(s.tasks);
  j["translations"] = rows(s.translations);
  j["assignments"] = rows(s.assignments);
  j["workers"] = rows(s.workers);
  j["sessions"] = rows(s.sessions);
  j["exam_forms"] = rows(s.exam_forms);
  j["exam_results"] = s.exam_results;
  j["directions"] = s.directions;
  json hist = json::object();
  for (const auto& [w, h] : s.histories) {
    json a = json::array();
    for (const auto& r : h) a.push_back(response_json(r));
    hist[std::to_string(w.value)] = std::move(a);
  }
  j["histories"] = std::move(hist);
  j["ledger_entries"] = s.ledger.entries();
  json tallies = json::array();
  for (const auto& [w, t] : s.ledger.tallies())
    tallies.push_back({{"worker", w}, {"verdicts", t.verdicts}, {"sets_booked", t.sets_booked}});
  j["ledger_tallies"] = std::move(tallies);
  j["next_id"] = s.next_id;
  return j;
}

State state_from_json(const json& j) {
  State s;
  for (const auto& r : j.at("sources")) s.put(r.get<SourceSentence>());
  for (const auto& r : j.at("tasks")) s.put(r.get<TranslationTask>());
  for (const auto& r : j.at("translations")) s.put(r.get<Translation>());
  for (const auto& r : j.at("assignments")) s.put(r.get<VerificationAssignment>());
  for (const auto& r : j.at("workers")) s.put(r.get<WorkerProfile>());
  for (const auto& r : j.at("sessions")) s.put(r.get<Session>());
  for (const auto& r : j.at("exam_forms")) s.put(r.get<exam::ExamForm>());
  for (const auto& r : j.at("exam_results")) s.add(r.get<exam::ExamResult>());
  for (const auto& r : j.at("directions")) s.add_direction(r.get<Direction>());
  for (const auto& [w, h] : j.at("histories").items()) {
    const WorkerId id{std::stoull(w)};
    std::size_t i = 0;
    for (const auto& r : h) s.add_response(id, i++, response_from(r));
  }
  for (const auto& r : j.at("ledger_entries")) s.ledger.restore_entry(r.get<ledger::CostEntry>());
  for (const auto& r : j.at("ledger_tallies"))
    s.ledger.restore_tally(r.at("worker").get<WorkerId>(),
                           {r.at("verdicts").get<std::uint64_t>(), r.at("sets_booked").get<std::uint64_t>()});
  s.next_id = j.at("next_id").get<std::uint64_t>();
  return s;
}

// --- Txn --------------------------------------------------------------------

void Txn::log(std::string_view type, json row) {
  if (!journaling_) return;
  journal_.push_back(json{{"t", type}, {"v", std::move(row)}}.dump());
}

std::uint64_t Txn::allocate_id() {
  const auto id = state_.allocate_id();
  log("next_id", state_.next_id);
  return id;
}

void Txn::put(const SourceSentence& row) { state_.put(row); if (journaling_) log("source", row); }
void Txn::put(const TranslationTask& row) { state_.put(row); if (journaling_) log("task", row); }
void Txn::put(const Translation& row) { state_.put(row); if (journaling_) log("translation", row); }
void Txn::put(const VerificationAssignment& row) { state_.put(row); if (journaling_) log("assignment", row); }
void Txn::put(const WorkerProfile& row) { state_.put(row); if (journaling_) log("worker", row); }
void Txn::put(const Session& row) { state_.put(row); if (journaling_) log("session", row); }
void Txn::put(const exam::ExamForm& form) { state_.put(form); if (journaling_) log("exam_form", form); }
void Txn::add(const exam::ExamResult& r) { state_.add(r); if (journaling_) log("exam_result", r); }

void Txn::add_response(WorkerId worker, const qc::Response& response) {
  const auto index = state_.histories[worker].size();
  state_.add_response(worker, index, response);
  if (journaling_) log("response", {{"worker", worker}, {"index", index}, {"r", response_json(response)}});
}

void Txn::add_direction(const Direction& d) {
  if (state_.has_direction(d)) return;
  state_.add_direction(d);
  log("direction", d);
}

ledger::CostEntry Txn::record_translation_payment(WorkerId worker, Timestamp at) {
  auto entry = state_.ledger.record_translation_payment(worker, at);
  if (journaling_) log("cost", entry);
  return entry;
}

std::vector<ledger::CostEntry> Txn::count_verdict_and_settle(WorkerId worker, Timestamp at) {
  state_.ledger.count_verdict(worker);
  auto booked = state_.ledger.settle_verification_payments(worker, at);
  if (journaling_) {
    for (const auto& e : booked) log("cost", e);
    const auto& t = state_.ledger.tallies().at(worker);
    log("tally", {{"worker", worker}, {"verdicts", t.verdicts}, {"sets_booked", t.sets_booked}});
  }
  return booked;
}

namespace {

void apply_journal_record(State& s, const json& rec) {
  const auto type = rec.at("t").get<std::string>();
  const auto& v = rec.at("v");
  if (type == "source") s.put(v.get<SourceSentence>());
  else if (type == "task") s.put(v.get<TranslationTask>());
  else if (type == "translation") s.put(v.get<Translation>());
  else if (type == "assignment") s.put(v.get<VerificationAssignment>());
  else if (type == "worker") s.put(v.get<WorkerProfile>());
  else if (type == "session") s.put(v.get<Session>());
  else if (type == "exam_form") s.put(v.get<exam::ExamForm>());
  else if (type == "exam_result") s.add(v.get<exam::ExamResult>());
  else if (type == "direction") s.add_direction(v.get<Direction>());
  else if (type == "next_id") s.next_id = std::max(s.next_id, v.get<std::uint64_t>());
  else if (type == "response")
    s.add_response(v.at("worker").get<WorkerId>(), v.at("index").get<std::size_t>(), response_from(v.at("r")));
  else if (type == "cost") {
    const auto e = v.get<ledger::CostEntry>();
    if (e.seq > s.ledger.entries().size()) s.ledger.restore_entry(e);
  } else if (type == "tally")
    s.ledger.restore_tally(v.at("worker").get<WorkerId>(),
                           {v.at("verdicts").get<std::uint64_t>(), v.at("sets_booked").get<std::uint64_t>()});
  else
    fail(ErrorKind::integrity, "unknown journal record '" + type + "'");
}

constexpr std::string_view kMagic = "CORPUSFORGE-STORE";
constexpr int kSnapshotVersion = 1;

std::uint32_t crc_of(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::string encode_snapshot(const State& state) {
  const auto body = to_json(state).dump();
  return fmt::format("{} {}\n{}\nCRC32 {:08x}\n", kMagic, kSnapshotVersion, body, crc_of(body));
}

State decode_snapshot(std::string_view bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos) fail(ErrorKind::integrity, "snapshot header missing");
  const auto header = bytes.substr(0, nl);
  if (header.substr(0, kMagic.size()) != kMagic) fail(ErrorKind::integrity, "not a store snapshot");
  if (header != fmt::format("{} {}", kMagic, kSnapshotVersion))
    fail(ErrorKind::integrity, "unsupported snapshot version: " + std::string(header));
  auto rest = bytes.substr(nl + 1);
  if (rest.empty() || rest.back() != '\n') fail(ErrorKind::integrity, "snapshot truncated");
  const auto trailer_at = rest.rfind("\nCRC32 ");
  if (trailer_at == std::string_view::npos) fail(ErrorKind::integrity, "snapshot truncated");
  const auto body = rest.substr(0, trailer_at);
  const auto trailer = rest.substr(trailer_at + 7, rest.size() - trailer_at - 8);
  if (trailer != fmt::format("{:08x}", crc_of(body))) fail(ErrorKind::integrity, "snapshot checksum mismatch");
  try {
    return state_from_json(json::parse(body));
  } catch (const json::exception& e) {
    fail(ErrorKind::integrity, std::string("snapshot body unreadable: ") + e.what());
  }
}

// --- Store ------------------------------------------------------------------

Store::Store() = default;

Store::Store(std::filesystem::path file, StoreOptions options) : path_(std::move(file)), options_(options) {
  if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
    if (ec) fail(ErrorKind::environment, "cannot create " + path_.parent_path().string() + ": " + ec.message());
  }
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    state_ = decode_snapshot(buf.str());
  }
  replay_journal();
  checkpoint_locked();
}

Store::~Store() {
  if (journal_) std::fclose(journal_);
}

void Store::replay_journal() {
  const auto wal = path_.string() + ".wal";
  std::ifstream in(wal, std::ios::binary);
  if (!in) return;
  std::string line;
  // A torn or corrupt tail ends the replay; everything before it is intact.
  while (std::getline(in, line)) {
    if (line.size() < 10 || line[8] != ' ') break;
    const auto payload = std::string_view(line).substr(9);
    if (line.substr(0, 8) != fmt::format("{:08x}", crc_of(payload))) break;
    json batch;
    try {
      batch = json::parse(payload);
    } catch (const json::exception&) {
      break;
    }
    if (!batch.is_array()) break;
    for (const auto& rec : batch) apply_journal_record(state_, rec);
  }
}

void Store::open_journal() {
  if (journal_) std::fclose(journal_);
  journal_ = std::fopen((path_.string() + ".wal").c_str(), "wb");
  if (!journal_) fail(ErrorKind::environment, "cannot open journal for " + path_.string());
  journal_bytes_ = 0;
}

void Store::checkpoint_locked() {
  const auto tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::environment, "cannot write " + tmp);
    out << encode_snapshot(state_);
    out.flush();
    if (!out) fail(ErrorKind::environment, "short write to " + tmp);
  }
  std::filesystem::rename(tmp, path_);
  open_journal();
}

void Store::checkpoint() {
  if (!persistent()) return;
  std::unique_lock lock(mutex_);
  checkpoint_locked();
}

void Store::commit(Txn& txn) {
  if (!journal_ || txn.journal().empty()) return;
  // One line per transaction, so a torn write loses the whole transaction
  // rather than half of it.
  const auto payload = fmt::format("[{}]", fmt::join(txn.journal(), ","));
  const auto line = fmt::format("{:08x} {}\n", crc_of(payload), payload);
  if (std::fwrite(line.data(), 1, line.size(), journal_) != line.size())
    fail(ErrorKind::environment, "journal write failed");
  journal_bytes_ += line.size();
  std::fflush(journal_);
  if (options_.fsync) fsync(fileno(journal_));
  if (journal_bytes_ > options_.checkpoint_bytes) checkpoint_locked();
}

std::string Store::snapshot() const {
  std::shared_lock lock(mutex_);
  return encode_snapshot(state_);
}

void Store::restore(std::string_view bytes) {
  auto next = decode_snapshot(bytes);
  std::unique_lock lock(mutex_);
  state_ = std::move(next);
  if (persistent()) checkpoint_locked();
}

}  // namespace corpusforge::store
