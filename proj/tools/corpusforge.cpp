// Operator CLI: service, ingestion, exams, simulation and reporting.
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "corpusforge/corpus.hpp"
#include "corpusforge/engine.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/exam.hpp"
#include "corpusforge/ingest.hpp"
#include "corpusforge/langid.hpp"
#include "corpusforge/ledger.hpp"
#include "corpusforge/service.hpp"
#include "corpusforge/sim/sim.hpp"
#include "corpusforge/store.hpp"

#ifndef CORPUSFORGE_DATA_DIR
#define CORPUSFORGE_DATA_DIR "data"
#endif

using namespace corpusforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  if (!in) fail(ErrorKind::input, "cannot read " + p.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

// The config named on the command line or in $CORPUSFORGE_CONFIG; without
// one, an in-memory service trained on the bundled seed corpora.
service::ServiceConfig config_from(const std::string& path, const fs::path& data_dir) {
  if (auto p = service::resolve_config_path(path.empty() ? std::nullopt : std::optional(path)))
    return service::load_config(*p);
  service::ServiceConfig c;
  const auto train = data_dir / "langid" / "train";
  if (!fs::is_directory(train)) fail(ErrorKind::configuration, "no config given and no seed data at " + train.string());
  for (const auto& entry : fs::directory_iterator(train))
    if (entry.path().extension() == ".txt") c.train_texts[entry.path().stem().string()] = entry.path();
  return c;
}

store::Store open_store(const service::ServiceConfig& c) {
  if (c.store_path.empty()) fail(ErrorKind::configuration, "store.path is not configured");
  if (!fs::exists(c.store_path)) fail(ErrorKind::configuration, "no store at " + c.store_path.string());
  return store::Store(c.store_path);
}

std::pair<std::string, int> split_url(const std::string& url) {
  auto rest = url;
  if (auto p = rest.find("://"); p != std::string::npos) rest = rest.substr(p + 3);
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos) fail(ErrorKind::input, "url must be host:port");
  return {rest.substr(0, colon), std::stoi(rest.substr(colon + 1))};
}

// Either a remote service or one started in this process.
struct Target {
  std::string host;
  int port = 0;
  service::Runtime runtime;
  std::unique_ptr<service::ApiService> api;
};

Target target_from(const std::string& url, const std::string& config, const fs::path& data_dir) {
  Target t;
  if (!url.empty()) {
    std::tie(t.host, t.port) = split_url(url);
    return t;
  }
  auto c = config_from(config, data_dir);
  t.runtime = service::build_runtime(c);
  t.api = std::make_unique<service::ApiService>(*t.runtime.engine, service::api_options(c));
  t.host = "127.0.0.1";
  t.api->start(t.host, 0);
  t.port = t.api->port();
  return t;
}

service::ApiService* g_serving = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpusforge: crowd-translation pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  std::string data_dir = CORPUSFORGE_DATA_DIR;
  app.add_option("--config", config_path, "config file (default: $CORPUSFORGE_CONFIG)");
  app.add_option("--data", data_dir, "seed data directory");

  auto* serve = app.add_subcommand("serve", "run the HTTP service");

  auto* ing = app.add_subcommand("ingest", "add source sentences to the pool");
  std::string ing_lang, ing_origin = "cli", ing_file, ing_direction;
  ing->add_option("--lang", ing_lang, "expected language")->required();
  ing->add_option("--origin", ing_origin, "provenance label");
  ing->add_option("--file", ing_file, "UTF-8 text, one sentence per line")->required();
  ing->add_option("--direction", ing_direction, "also create translation tasks in this direction");

  auto* eb = app.add_subcommand("exam-build", "build an exam form from pool files");
  std::string eb_direction, eb_pools, eb_out;
  std::uint64_t eb_seed = 1;
  eb->add_option("--direction", eb_direction)->required();
  eb->add_option("--seed", eb_seed);
  eb->add_option("--pools", eb_pools, "directory with correct.tsv, glossary.tsv, otherlang.txt");
  eb->add_option("--out", eb_out, "write the form here instead of stdout");

  auto* simc = app.add_subcommand("simulate", "drive a simulated worker population through the API");
  std::string sim_profiles, sim_url;
  std::size_t sim_sources = 100;
  std::uint64_t sim_seed = 1;
  bool sim_concurrent = false;
  simc->add_option("--profiles", sim_profiles, "worker profiles JSON")->required();
  simc->add_option("--sources", sim_sources, "sources per direction");
  simc->add_option("--seed", sim_seed);
  simc->add_option("--url", sim_url, "running service host:port (default: start one in-process)");
  simc->add_flag("--concurrent", sim_concurrent, "one client thread per worker group");

  auto* rp = app.add_subcommand("replay", "replay a funnel fixture through the API");
  std::string rp_fixture, rp_url, rp_format = "table";
  rp->add_option("--fixture", rp_fixture)->required();
  rp->add_option("--url", rp_url);
  rp->add_option("--format", rp_format)->check(CLI::IsMember({"json", "table"}));

  auto* ex = app.add_subcommand("export", "export the accepted corpus");
  std::string ex_direction, ex_format = "jsonl", ex_url;
  bool ex_pending = false;
  ex->add_option("--direction", ex_direction)->required();
  ex->add_option("--format", ex_format)->check(CLI::IsMember({"jsonl", "tsv"}));
  ex->add_flag("--include-pending", ex_pending);

  auto* st = app.add_subcommand("stats", "print funnel statistics");
  std::string st_format = "table";
  st->add_option("--format", st_format)->check(CLI::IsMember({"json", "table"}));

  auto* co = app.add_subcommand("cost", "ledger totals and projections");
  std::string co_by, co_worker;
  bool co_csv = false;
  co->add_option("--by", co_by)->check(CLI::IsMember({"worker", "kind"}));
  co->add_option("--worker", co_worker, "only this worker");
  co->add_flag("--csv", co_csv, "print ledger entries as CSV");
  auto* proj = co->add_subcommand("project", "cost of a translation programme");
  std::int64_t pr_langs = 0, pr_sentences = 0;
  std::string pr_price = "1";
  proj->add_option("--languages", pr_langs)->required();
  proj->add_option("--sentences", pr_sentences)->required();
  proj->add_option("--price", pr_price);

  auto* lt = app.add_subcommand("langid-train", "train a language profile");
  std::string lt_lang, lt_file, lt_out;
  lt->add_option("--lang", lt_lang)->required();
  lt->add_option("--file", lt_file)->required();
  lt->add_option("--out", lt_out, "profile path (default <lang>.profile.json)");

  auto* ld = app.add_subcommand("langid-detect", "detect the language of a text");
  std::string ld_text;
  std::vector<std::string> ld_profiles;
  ld->add_option("--text", ld_text)->required();
  ld->add_option("--profile", ld_profiles, "profile files (default: configured profiles)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      auto c = config_from(config_path, data_dir);
      auto rt = service::build_runtime(c);
      service::ApiService api(*rt.engine, service::api_options(c));
      const int port = api.bind(c.host, c.port);
      g_serving = &api;
      std::signal(SIGINT, [](int) { if (g_serving) g_serving->stop(); });
      std::signal(SIGTERM, [](int) { if (g_serving) g_serving->stop(); });
      std::cerr << fmt::format("listening on {}:{}\n", c.host, port);
      api.run();
      rt.store->checkpoint();
    } else if (*ing) {
      auto c = config_from(config_path, data_dir);
      auto rt = service::build_runtime(c);
      std::vector<ingest::RawLine> lines;
      for (auto& l : read_lines(ing_file)) lines.push_back({std::move(l), ing_origin});
      std::vector<SourceId> kept;
      const auto report = ingest::ingest(*rt.store, lines, ing_lang, *rt.detector, c.ingest, &kept);
      json out = report;
      if (!ing_direction.empty())
        out["tasks_created"] = rt.engine->create_translation_tasks(kept, Direction::parse(ing_direction)).size();
      std::cout << out.dump(2) << '\n';
    } else if (*eb) {
      const auto d = Direction::parse(eb_direction);
      const fs::path pools = eb_pools.empty() ? fs::path(data_dir) / "exam" / d.code() : fs::path(eb_pools);
      const json form = exam::build_exam(d, exam::load_pools(pools), eb_seed);
      if (eb_out.empty()) {
        std::cout << form.dump(2) << '\n';
      } else {
        std::ofstream(eb_out) << form.dump(2) << '\n';
      }
    } else if (*simc) {
      std::ifstream in(sim_profiles);
      if (!in) fail(ErrorKind::input, "cannot read " + sim_profiles);
      const auto profiles = json::parse(in);
      auto cfg = sim::load_sim_data(data_dir, profiles.at("directions").get<std::vector<std::string>>());
      cfg.sources_per_direction = sim_sources;
      cfg.seed = sim_seed;
      sim::apply_profiles(cfg, profiles);
      if (sim_concurrent) cfg.concurrent = true;
      auto t = target_from(sim_url, config_path, data_dir);
      std::cout << sim::to_json(sim::simulate(t.host, t.port, cfg)).dump(2) << '\n';
    } else if (*rp) {
      auto t = target_from(rp_url, config_path, data_dir);
      sim::ApiClient client(t.host, t.port);
      sim::replay_funnel(client, fs::path(rp_fixture));
      const auto funnel = client.funnel();
      if (rp_format == "json") {
        std::cout << funnel.dump(2) << '\n';
      } else {
        corpus::FunnelStats stats;
        auto row = [](const json& r) {
          return corpus::FunnelCounts{r.at("translated"), r.at("fully_verified"), r.at("in_corpus")};
        };
        stats.total = row(funnel.at("total"));
        for (const auto& d : funnel.at("directions"))
          stats.directions.emplace_back(Direction::parse(d.at("direction").get<std::string>()), row(d));
        std::cout << corpus::format_table(stats);
      }
    } else if (*ex) {
      auto s = open_store(config_from(config_path, data_dir));
      std::cout << corpus::export_corpus(s, Direction::parse(ex_direction), corpus::parse_export_format(ex_format),
                                         ex_pending);
    } else if (*st) {
      auto s = open_store(config_from(config_path, data_dir));
      const auto stats = corpus::funnel_stats(s);
      if (st_format == "json") std::cout << json(stats).dump(2) << '\n';
      else std::cout << corpus::format_table(stats);
    } else if (*co) {
      if (*proj) {
        const auto total = ledger::project_cost(pr_langs, pr_sentences, Money::parse(pr_price));
        std::cout << total.display() << '\n';
        return 0;
      }
      auto s = open_store(config_from(config_path, data_dir));
      s.read([&](const store::State& state) {
        if (co_csv) {
          std::cout << state.ledger.to_csv();
          return;
        }
        ledger::CostFilter base;
        if (!co_worker.empty()) {
          const auto* w = state.find_worker(co_worker);
          if (!w) fail(ErrorKind::not_found, "no worker named '" + co_worker + "'");
          base.worker = w->id;
        }
        auto line = [](const std::string& label, const ledger::CostTotals& t) {
          std::cout << fmt::format("{:<24} translation {:>14}  verification {:>14}  total {:>14}\n", label,
                                   t.translation.display(), t.verification.display(), t.grand.display());
        };
        if (co_by == "worker") {
          for (const auto& [id, w] : state.workers) {
            auto f = base;
            f.worker = id;
            if (base.worker && *base.worker != id) continue;
            line(w.name, state.ledger.totals(f));
          }
        } else if (co_by == "kind") {
          for (auto k : {ledger::CostKind::translation, ledger::CostKind::verification_set}) {
            auto f = base;
            f.kind = k;
            line(std::string(ledger::to_string(k)), state.ledger.totals(f));
          }
        }
        line("all", state.ledger.totals(base));
      });
    } else if (*lt) {
      auto lines = read_lines(lt_file);
      const auto profile = langid::train_profile(lines, lt_lang);
      const auto out = lt_out.empty() ? lt_lang + ".profile.json" : lt_out;
      langid::save_profile(profile, out);
      std::cout << json{{"lang", lt_lang}, {"out", out}, {"ngrams", profile.total_ngrams()},
                        {"vocabulary", profile.vocabulary()}}.dump() << '\n';
    } else if (*ld) {
      std::shared_ptr<const langid::Detector> detector;
      if (!ld_profiles.empty()) {
        service::ServiceConfig c;
        for (const auto& p : ld_profiles) c.profiles[langid::load_profile(p).lang()] = p;
        detector = service::load_detector(c);
      } else {
        detector = service::load_detector(config_from(config_path, data_dir));
      }
      const auto d = detector->detect(ld_text);
      json ranking = json::array();
      for (const auto& [lang, score] : d.ranking) ranking.push_back({{"lang", lang}, {"score", score}});
      std::cout << json{{"lang", d.lang}, {"score", d.score}, {"margin", d.margin}, {"confident", d.confident},
                        {"ranking", ranking}}.dump(2) << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.kind() == ErrorKind::input ? 2 : 1;
  } catch (const sim::ApiError& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
