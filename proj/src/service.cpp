#include "corpusforge/service.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/program_options.hpp>
#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "corpusforge/corpus.hpp"
#include "corpusforge/exam.hpp"

namespace corpusforge::service {

namespace po = boost::program_options;
using nlohmann::json;

// --- configuration -----------------------------------------------------------

namespace {

std::string strip_prefix(const std::string& key, std::string_view prefix) {
  return key.substr(prefix.size());
}

bool starts_with(const std::string& s, std::string_view prefix) { return s.rfind(prefix, 0) == 0; }

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::configuration, fmt::format("{}: '{}' is not a number", key, v));
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used == v.size()) return n;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::configuration, fmt::format("{}: '{}' is not an integer", key, v));
}

std::int64_t to_non_negative(const std::string& key, const std::string& v) {
  const auto n = to_int(key, v);
  if (n < 0) fail(ErrorKind::configuration, key + " must be >= 0");
  return n;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorKind::configuration, fmt::format("{}: '{}' is not a boolean", key, v));
}

Money to_price(const std::string& key, const std::string& v) {
  Money m;
  try {
    m = Money::parse(v);
  } catch (const Error& e) {
    fail(ErrorKind::configuration, key + ": " + e.what());
  }
  if (m < Money{}) fail(ErrorKind::configuration, key + " must be >= 0");
  return m;
}

}  // namespace

ServiceConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  std::istringstream in(text);
  po::options_description none;
  po::parsed_options parsed(&none);
  try {
    parsed = po::parse_config_file(in, none, true);
  } catch (const po::error& e) {
    fail(ErrorKind::configuration, std::string("config: ") + e.what());
  }
  auto path_of = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };

  ServiceConfig c;
  for (const auto& opt : parsed.options) {
    const auto& key = opt.string_key;
    const std::string v = opt.value.empty() ? std::string() : opt.value.front();
    if (key == "listen") {
      const auto colon = v.rfind(':');
      if (colon == std::string::npos) fail(ErrorKind::configuration, "listen must be host:port");
      c.host = v.substr(0, colon);
      c.port = static_cast<int>(to_int(key, v.substr(colon + 1)));
      if (c.port < 0 || c.port > 65535) fail(ErrorKind::configuration, "listen port out of range");
    } else if (key == "store.path") {
      c.store_path = v.empty() ? std::filesystem::path() : path_of(v);
    } else if (key == "price.translation") {
      c.prices.per_translation = to_price(key, v);
    } else if (key == "price.verdict_set") {
      c.prices.per_verdict_set = to_price(key, v);
    } else if (key == "price.verdicts_per_set") {
      c.prices.verdicts_per_set = to_int(key, v);
      if (c.prices.verdicts_per_set < 1) fail(ErrorKind::configuration, key + " must be >= 1");
    } else if (key == "qc.length_ratio_max") {
      c.engine.length_ratio_max = to_double(key, v);
      if (!(c.engine.length_ratio_max >= 1.0)) fail(ErrorKind::configuration, key + " must be >= 1");
    } else if (key == "qc.fast_ms.translate") {
      c.engine.fast.translate_ms = to_non_negative(key, v);
    } else if (key == "qc.fast_ms.verify") {
      c.engine.fast.verify_ms = to_non_negative(key, v);
    } else if (key == "qc.fast_min_occurrences") {
      c.engine.fast.min_occurrences = static_cast<std::size_t>(to_non_negative(key, v));
      if (c.engine.fast.min_occurrences < 1) fail(ErrorKind::configuration, key + " must be >= 1");
    } else if (key == "qc.langid_margin") {
      c.langid_margin = to_double(key, v);
      if (!(c.langid_margin >= 0)) fail(ErrorKind::configuration, key + " must be >= 0");
    } else if (key == "deadline.translate_ms") {
      c.engine.translate_deadline_ms = to_non_negative(key, v);
    } else if (key == "deadline.verify_ms") {
      c.engine.verify_deadline_ms = to_non_negative(key, v);
    } else if (key == "session.ttl_ms") {
      c.engine.session_ttl_ms = to_non_negative(key, v);
    } else if (starts_with(key, "langid.profile.")) {
      c.profiles[strip_prefix(key, "langid.profile.")] = path_of(v);
    } else if (starts_with(key, "langid.train.")) {
      c.train_texts[strip_prefix(key, "langid.train.")] = path_of(v);
    } else if (key == "requester.enabled") {
      c.requester_enabled = to_bool(key, v);
    } else if (key == "requester.token") {
      c.requester_token = v;
    } else if (key == "directions") {
      std::stringstream list(v);
      std::string code;
      while (std::getline(list, code, ',')) {
        code.erase(0, code.find_first_not_of(' '));
        code.erase(code.find_last_not_of(' ') + 1);
        if (!code.empty()) c.directions.push_back(Direction::parse(code));
      }
    } else if (key == "ingest.min_chars") {
      c.ingest.min_chars = static_cast<std::size_t>(to_non_negative(key, v));
    } else if (key == "ingest.max_chars") {
      c.ingest.max_chars = static_cast<std::size_t>(to_non_negative(key, v));
    } else if (key == "ingest.max_occurrences") {
      c.ingest.max_occurrences = static_cast<std::size_t>(to_non_negative(key, v));
      if (c.ingest.max_occurrences < 1) fail(ErrorKind::configuration, key + " must be >= 1");
    } else if (key == "exam.pass_threshold") {
      c.engine.exam_pass_threshold = static_cast<int>(to_int(key, v));
      if (c.engine.exam_pass_threshold < 0 || c.engine.exam_pass_threshold > 10)
        fail(ErrorKind::configuration, key + " must be within 0..10");
    } else if (starts_with(key, "exam.pool.")) {
      c.exam_pools[Direction::parse(strip_prefix(key, "exam.pool.")).code()] = path_of(v);
    } else if (key == "exam.seed") {
      c.exam_seed = static_cast<std::uint64_t>(to_non_negative(key, v));
    } else if (key == "server.threads") {
      c.threads = static_cast<std::size_t>(to_non_negative(key, v));
      if (c.threads < 1) fail(ErrorKind::configuration, key + " must be >= 1");
    } else {
      fail(ErrorKind::configuration, "unknown config key '" + key + "'");
    }
  }
  if (c.ingest.min_chars > c.ingest.max_chars)
    fail(ErrorKind::configuration, "ingest.min_chars exceeds ingest.max_chars");
  for (const auto& [lang, p] : c.profiles)
    if (!std::filesystem::exists(p)) fail(ErrorKind::configuration, "profile file missing: " + p.string());
  for (const auto& [lang, p] : c.train_texts)
    if (!std::filesystem::exists(p)) fail(ErrorKind::configuration, "training text missing: " + p.string());
  for (const auto& [dir, p] : c.exam_pools)
    if (!std::filesystem::is_directory(p)) fail(ErrorKind::configuration, "exam pool missing: " + p.string());
  return c;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::configuration, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& explicit_path) {
  if (explicit_path && !explicit_path->empty()) return std::filesystem::path(*explicit_path);
  if (const char* env = std::getenv("CORPUSFORGE_CONFIG"); env && *env) return std::filesystem::path(env);
  return std::nullopt;
}

std::shared_ptr<const langid::Detector> load_detector(const ServiceConfig& config) {
  std::vector<std::shared_ptr<const langid::LangProfile>> profiles;
  for (const auto& [lang, path] : config.profiles) {
    auto p = langid::load_profile(path);
    if (p.lang() != lang)
      fail(ErrorKind::configuration, fmt::format("{} holds a '{}' profile, expected '{}'", path.string(), p.lang(), lang));
    profiles.push_back(std::make_shared<const langid::LangProfile>(std::move(p)));
  }
  for (const auto& [lang, path] : config.train_texts) {
    if (config.profiles.count(lang)) fail(ErrorKind::configuration, "two profile sources for '" + lang + "'");
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
    profiles.push_back(std::make_shared<const langid::LangProfile>(langid::train_profile(lines, lang)));
  }
  if (profiles.size() < 2) fail(ErrorKind::configuration, "at least two language profiles are required");
  return std::make_shared<const langid::Detector>(std::move(profiles), config.langid_margin);
}

Runtime build_runtime(const ServiceConfig& config, Clock clock) {
  return build_runtime(config, load_detector(config), std::move(clock));
}

Runtime build_runtime(const ServiceConfig& config, std::shared_ptr<const langid::Detector> detector, Clock clock) {
  Runtime rt;
  rt.detector = std::move(detector);
  for (const auto& d : config.directions)
    for (const auto& l : {d.src, d.tgt})
      if (!rt.detector->has(l)) fail(ErrorKind::configuration, "direction " + d.code() + " has no profile for " + l);
  rt.store = config.store_path.empty() ? std::make_unique<store::Store>()
                                       : std::make_unique<store::Store>(config.store_path);
  rt.store->write([&](store::Txn& txn) {
    txn.set_prices(config.prices);
    for (const auto& d : config.directions) txn.add_direction(d);
  });
  rt.engine = std::make_unique<engine::TaskEngine>(*rt.store, rt.detector, config.engine, std::move(clock));
  for (const auto& [code, dir] : config.exam_pools) {
    const auto d = Direction::parse(code);
    const bool installed = rt.store->read([&](const store::State& s) { return s.exam_forms.count(code) > 0; });
    if (!installed) rt.engine->install_exam(exam::build_exam(d, exam::load_pools(dir), config.exam_seed));
  }
  return rt;
}

ApiOptions api_options(const ServiceConfig& config) {
  return ApiOptions{config.requester_enabled, config.requester_token, config.ingest, config.threads};
}

// --- HTTP --------------------------------------------------------------------

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input:
    case ErrorKind::range:
    case ErrorKind::training: return 400;
    case ErrorKind::auth: return 401;
    case ErrorKind::permission: return 403;
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::environment: return 503;
    case ErrorKind::configuration:
    case ErrorKind::integrity: return 500;
  }
  return 500;
}

std::vector<Route> route_table() {
  return {
      {"POST", "/v1/workers", false, "register a worker with declared languages; returns a session token"},
      {"GET", "/v1/workers/me", false, "the caller's profile, exam results, flag and earnings"},
      {"GET", "/v1/tasks/next", false, "next task, kind=translate|verify; 204 when none is eligible"},
      {"POST", "/v1/tasks/{id}/translation", false, "submit a translation for an assigned task"},
      {"POST", "/v1/assignments/{id}/verdict", false, "submit a good/bad verdict"},
      {"GET", "/v1/exam/{direction}", false, "current exam form without answers"},
      {"POST", "/v1/exam/{direction}/answers", false, "grade ten answers"},
      {"GET", "/v1/stats/funnel", true, "translated / verified / in-corpus per direction"},
      {"GET", "/v1/export", true, "accepted corpus, direction=&format=jsonl|tsv&include_pending="},
      {"GET", "/v1/cost", true, "ledger totals, or entries with format=csv"},
      {"POST", "/v1/sources", true, "ingest source lines and optionally create translation tasks"},
      {"POST", "/v1/exam/{direction}/form", true, "install an exam form or build one from pools"},
      {"POST", "/v1/workers/{name}/clear", true, "clear a worker's trust flag"},
      {"GET", "/v1/routes", false, "this table"},
  };
}

namespace {

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", kind}, {"message", message}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class F>
httplib::Server::Handler wrap(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.kind()), to_string(e.kind()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "input", std::string("malformed request body: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) fail(ErrorKind::input, "request body is empty");
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) fail(ErrorKind::input, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    fail(ErrorKind::input, std::string("request body is not JSON: ") + e.what());
  }
}

std::uint64_t id_param(const httplib::Request& req, const char* name) {
  const auto& v = req.path_params.at(name);
  std::uint64_t id = 0;
  for (char c : v) {
    if (c < '0' || c > '9' || id > (UINT64_MAX - 9) / 10) fail(ErrorKind::input, "malformed id '" + v + "'");
    id = id * 10 + static_cast<std::uint64_t>(c - '0');
  }
  if (v.empty()) fail(ErrorKind::input, "missing id");
  return id;
}

std::string bearer(const httplib::Request& req) {
  const auto h = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (h.rfind(prefix, 0) != 0 || h.size() == prefix.size()) fail(ErrorKind::auth, "missing bearer token");
  return h.substr(prefix.size());
}

std::int64_t elapsed_of(const json& body) {
  if (!body.contains("elapsed_ms")) fail(ErrorKind::input, "elapsed_ms is required");
  return body.at("elapsed_ms").get<std::int64_t>();
}

bool flag_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return false;
  const auto v = req.get_param_value(name);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0" || v.empty()) return false;
  fail(ErrorKind::input, std::string(name) + " must be true or false");
}

json public_form(const exam::ExamForm& form) {
  json items = json::array();
  for (const auto& item : form.items) items.push_back({{"src", item.src}, {"tgt", item.tgt}});
  return {{"direction", form.direction},
          {"version", form.version},
          {"instruction", "Mark each pair correct if the second sentence is a translation of the first."},
          {"items", std::move(items)}};
}

exam::ExamPools pools_from_json(const json& j) {
  exam::ExamPools pools;
  for (const auto& pair : j.at("parallel")) pools.parallel.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
  for (const auto& pair : j.at("glossary")) pools.glossary.add(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
  for (const auto& s : j.at("other_lang")) pools.other_lang.push_back(s.get<std::string>());
  return pools;
}

}  // namespace

ApiService::ApiService(engine::TaskEngine& engine, ApiOptions options)
    : engine_(engine), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  const auto threads = options_.threads;
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  server_->set_keep_alive_max_count(1'000'000);
  server_->set_tcp_nodelay(true);
  install_routes();
}

ApiService::~ApiService() { stop(); }

int ApiService::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) fail(ErrorKind::environment, fmt::format("cannot bind {}:{}", host, port));
  return port_;
}

void ApiService::run() { server_->listen_after_bind(); }

void ApiService::start(const std::string& host, int port) {
  bind(host, port);
  thread_ = std::thread([this] { run(); });
  server_->wait_until_ready();
}

void ApiService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void ApiService::install_routes() {
  auto& srv = *server_;
  auto& eng = engine_;
  auto authed = [this](const httplib::Request& req) { return engine_.authenticate(bearer(req)); };
  auto requester = [this](const httplib::Request& req) {
    if (!options_.requester_enabled) fail(ErrorKind::permission, "requester endpoints are disabled");
    if (!options_.requester_token.empty() && bearer(req) != options_.requester_token)
      fail(ErrorKind::auth, "requester token required");
  };

  srv.Post("/v1/workers", wrap([&eng](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    const auto langs = body.at("langs").get<std::set<std::string>>();
    const auto reg = eng.register_worker(body.at("name").get<std::string>(), langs);
    send_json(res,
              {{"worker_id", reg.worker.id},
               {"name", reg.worker.name},
               {"langs", reg.worker.langs},
               {"token", reg.session.token},
               {"issued_at", reg.session.issued_at},
               {"expires_at", reg.session.expires_at}},
              201);
  }));

  srv.Get("/v1/workers/me", wrap([&eng, authed](const httplib::Request& req, httplib::Response& res) {
    const auto id = authed(req);
    json out = eng.store().read([&](const store::State& s) {
      const auto& w = s.workers.at(id);
      json exams = json::array();
      for (const auto& r : s.exam_results)
        if (r.worker == id) exams.push_back(r);
      ledger::CostFilter f;
      f.worker = id;
      return json{{"worker_id", w.id},
                  {"name", w.name},
                  {"langs", w.langs},
                  {"flag", w.flag ? json(*w.flag) : json(nullptr)},
                  {"exams", exams},
                  {"earnings", s.ledger.totals(f)}};
    });
    send_json(res, out);
  }));

  srv.Get("/v1/tasks/next", wrap([&eng, authed](const httplib::Request& req, httplib::Response& res) {
    const auto id = authed(req);
    if (!req.has_param("kind")) fail(ErrorKind::input, "kind=translate|verify is required");
    const auto kind = parse_task_kind(req.get_param_value("kind"));
    if (auto handle = eng.assign_next(id, kind)) {
      send_json(res, *handle);
    } else {
      res.status = 204;
    }
  }));

  srv.Post("/v1/tasks/:id/translation", wrap([&eng, authed](const httplib::Request& req, httplib::Response& res) {
    const auto worker = authed(req);
    const TaskId task{id_param(req, "id")};
    const auto body = body_of(req);
    send_json(res, eng.submit_translation(task, worker, body.at("text").get<std::string>(), elapsed_of(body)));
  }));

  srv.Post("/v1/assignments/:id/verdict", wrap([&eng, authed](const httplib::Request& req, httplib::Response& res) {
    const auto worker = authed(req);
    const AssignmentId a{id_param(req, "id")};
    const auto body = body_of(req);
    send_json(res, eng.submit_verdict(a, worker, parse_verdict(body.at("verdict").get<std::string>()),
                                      elapsed_of(body)));
  }));

  srv.Get("/v1/exam/:direction", wrap([&eng, authed](const httplib::Request& req, httplib::Response& res) {
    authed(req);
    send_json(res, public_form(eng.exam_form(Direction::parse(req.path_params.at("direction")))));
  }));

  srv.Post("/v1/exam/:direction/answers", wrap([&eng, authed](const httplib::Request& req, httplib::Response& res) {
    const auto worker = authed(req);
    const auto body = body_of(req);
    std::vector<exam::Label> answers;
    for (const auto& a : body.at("answers")) answers.push_back(exam::parse_label(a.get<std::string>()));
    const auto d = Direction::parse(req.path_params.at("direction"));
    send_json(res, eng.grade_exam(worker, d, body.at("version").get<std::string>(), answers));
  }));

  srv.Post("/v1/exam/:direction/form", wrap([&eng, requester](const httplib::Request& req, httplib::Response& res) {
    requester(req);
    const auto d = Direction::parse(req.path_params.at("direction"));
    const auto body = body_of(req);
    exam::ExamForm form;
    if (body.contains("form")) {
      form = body.at("form").get<exam::ExamForm>();
      if (form.direction != d) fail(ErrorKind::input, "form direction does not match the path");
    } else {
      form = exam::build_exam(d, pools_from_json(body.at("pools")), body.value("seed", std::uint64_t{1}));
    }
    eng.install_exam(form);
    const auto c = exam::composition(form);
    send_json(res,
              {{"direction", d},
               {"version", form.version},
               {"composition",
                {{"correct", c.correct}, {"mismatch", c.mismatch}, {"wrong_language", c.wrong_language},
                 {"word_for_word", c.word_for_word}}}},
              201);
  }));

  srv.Post("/v1/workers/:name/clear", wrap([&eng, requester](const httplib::Request& req, httplib::Response& res) {
    requester(req);
    const auto& name = req.path_params.at("name");
    const auto id = eng.store().read([&](const store::State& s) {
      const auto* w = s.find_worker(name);
      if (!w) fail(ErrorKind::not_found, "no worker named '" + name + "'");
      return w->id;
    });
    eng.clear_flag(id);
    send_json(res, {{"worker_id", id}, {"flag", nullptr}});
  }));

  srv.Get("/v1/stats/funnel", wrap([&eng, requester](const httplib::Request& req, httplib::Response& res) {
    requester(req);
    send_json(res, corpus::funnel_stats(eng.store()));
  }));

  srv.Get("/v1/export", wrap([&eng, requester](const httplib::Request& req, httplib::Response& res) {
    requester(req);
    if (!req.has_param("direction")) fail(ErrorKind::input, "direction is required");
    const auto d = Direction::parse(req.get_param_value("direction"));
    const auto format = corpus::parse_export_format(req.has_param("format") ? req.get_param_value("format") : "jsonl");
    auto bytes = corpus::export_corpus(eng.store(), d, format, flag_param(req, "include_pending"));
    res.set_content(std::move(bytes), format == corpus::ExportFormat::tsv ? "text/tab-separated-values; charset=utf-8"
                                                                          : "application/x-ndjson; charset=utf-8");
  }));

  srv.Get("/v1/cost", wrap([&eng, requester](const httplib::Request& req, httplib::Response& res) {
    requester(req);
    ledger::CostFilter f;
    const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
    if (format != "json" && format != "csv") fail(ErrorKind::input, "format must be json or csv");
    auto to_ts = [](const std::string& v) {
      try {
        return static_cast<Timestamp>(std::stoll(v));
      } catch (const std::exception&) {
        fail(ErrorKind::input, "malformed timestamp '" + v + "'");
      }
    };
    if (req.has_param("kind")) f.kind = ledger::parse_cost_kind(req.get_param_value("kind"));
    if (req.has_param("from")) f.from = to_ts(req.get_param_value("from"));
    if (req.has_param("to")) f.to = to_ts(req.get_param_value("to"));
    eng.store().read([&](const store::State& s) {
      if (req.has_param("worker")) {
        const auto* w = s.find_worker(req.get_param_value("worker"));
        if (!w) fail(ErrorKind::not_found, "no worker named '" + req.get_param_value("worker") + "'");
        f.worker = w->id;
      }
      if (format == "csv") {
        res.set_content(s.ledger.to_csv(), "text/csv; charset=utf-8");
        return;
      }
      const auto t = s.ledger.totals(f);
      json out = t;
      out["display"] = {{"translation", t.translation.display()},
                        {"verification", t.verification.display()},
                        {"total", t.grand.display()}};
      send_json(res, out);
    });
  }));

  srv.Post("/v1/sources", wrap([this, &eng, requester](const httplib::Request& req, httplib::Response& res) {
    requester(req);
    const auto body = body_of(req);
    const auto lang = body.at("lang").get<std::string>();
    const auto origin = body.value("origin", std::string("upload"));
    std::vector<ingest::RawLine> lines;
    for (const auto& l : body.at("lines")) lines.push_back({l.get<std::string>(), origin});
    std::optional<Direction> direction;
    if (body.contains("direction")) {
      direction = Direction::parse(body.at("direction").get<std::string>());
      if (direction->src != lang) fail(ErrorKind::input, "direction source language differs from lang");
    }
    std::vector<SourceId> kept;
    const auto report = ingest::ingest(eng.store(), lines, lang, eng.detector(), options_.ingest, &kept);
    json out = {{"report", report}};
    if (direction) out["tasks_created"] = eng.create_translation_tasks(kept, *direction).size();
    send_json(res, out, 201);
  }));

  srv.Get("/v1/routes", wrap([](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& r : route_table())
      out.push_back({{"method", r.method}, {"path", r.path}, {"requester", r.requester}, {"summary", r.summary}});
    send_json(res, out);
  }));
}

}  // namespace corpusforge::service
