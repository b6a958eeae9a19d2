#include "corpusforge/sim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>
#include <unordered_map>

namespace corpusforge::sim {

using nlohmann::json;

double expected_acceptance_rate(double g, double q) {
  if (!(g >= 0.0 && g <= 1.0) || !(q >= 0.0 && q <= 1.0))
    throw ApiError(0, "input", "g and q must lie in [0, 1]");
  double rate = 0.0;
  for (int truth_good = 0; truth_good < 2; ++truth_good) {
    const double p_truth = truth_good ? g : 1.0 - g;
    // Each verdict says "good" with this probability given the truth.
    const double p_good = truth_good ? q : 1.0 - q;
    for (int mask = 0; mask < 8; ++mask) {
      double p = p_truth;
      int goods = 0;
      for (int i = 0; i < 3; ++i) {
        const bool good = (mask >> i) & 1;
        goods += good;
        p *= good ? p_good : 1.0 - p_good;
      }
      if (goods >= 2) rate += p;
    }
  }
  return rate;
}

double closed_form_acceptance_rate(double g, double q) {
  const double m = q * q * q + 3 * q * q * (1 - q);
  return g * m + (1 - g) * (1 - m);
}

CheatMode parse_cheat_mode(const std::string& s) {
  if (s.empty() || s == "none") return CheatMode::none;
  if (s == "copy_source") return CheatMode::copy_source;
  if (s == "wrong_language") return CheatMode::wrong_language;
  if (s == "random_fast") return CheatMode::random_fast;
  throw ApiError(0, "input", "unknown cheat mode '" + s + "'");
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ApiError(0, "input", "cannot read " + p.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(std::move(line));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_pairs(const std::filesystem::path& p) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& line : read_lines(p)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

std::size_t visible_chars(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80 && c != ' ' && c != '\t') ++n;
  return n;
}

std::pair<std::string, std::string> split_direction(const std::string& code) {
  const auto dash = code.find('-');
  if (dash == std::string::npos) throw ApiError(0, "input", "malformed direction '" + code + "'");
  return {code.substr(0, dash), code.substr(dash + 1)};
}

struct Worker {
  const SimWorkerProfile* profile = nullptr;
  std::string name;
  std::string token;
  std::mt19937_64 rng;
  bool can_verify = false;
};

class Run {
 public:
  Run(const SimConfig& config) : config_(config) {}

  std::string translate(Worker& w, const json& task, std::int64_t& elapsed) {
    const auto [src_lang, tgt_lang] = split_direction(task.at("direction").get<std::string>());
    const auto source = task.at("source").get<std::string>();
    const auto& p = *w.profile;
    elapsed = speed(w, p.translate_median_ms);
    bool good = false;
    std::string text;
    switch (p.cheat) {
      case CheatMode::copy_source:
        text = source;
        break;
      case CheatMode::wrong_language: {
        std::string other = src_lang;
        for (const auto& [lang, pool] : config_.language_pools)
          if (lang != tgt_lang && lang != src_lang && !pool.empty()) other = lang;
        text = similar_length(w, other, source);
        break;
      }
      case CheatMode::random_fast:
        text = pick(w, tgt_lang);
        elapsed = std::uniform_int_distribution<std::int64_t>(200, 2'000)(w.rng);
        break;
      case CheatMode::none:
        text = similar_length(w, tgt_lang, source);
        good = std::bernoulli_distribution(p.g)(w.rng);
        break;
    }
    std::lock_guard lock(mutex_);
    truth_[task.at("task_id").get<std::uint64_t>()] = good;
    return text;
  }

  std::string judge(Worker& w, const json& task, std::int64_t& elapsed) {
    elapsed = speed(w, w.profile->verify_median_ms);
    bool truth = true;
    {
      std::lock_guard lock(mutex_);
      if (auto it = truth_.find(task.at("task_id").get<std::uint64_t>()); it != truth_.end()) truth = it->second;
    }
    const bool right = std::bernoulli_distribution(w.profile->q)(w.rng);
    return (truth == right) ? "good" : "bad";
  }

  void record(const std::string& direction, const json& outcome) {
    std::lock_guard lock(mutex_);
    auto& d = per_direction_[direction];
    ++d.submitted;
    if (outcome.at("outcome") == "auto_rejected") ++d.auto_rejected;
  }

  std::map<std::string, DirectionReport> per_direction_;

 private:
  std::int64_t speed(Worker& w, double median) {
    std::lognormal_distribution<double> dist(std::log(median), w.profile->speed_sigma);
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(dist(w.rng)));
  }

  const std::vector<std::string>& pool(const std::string& lang) {
    auto it = config_.language_pools.find(lang);
    if (it == config_.language_pools.end() || it->second.empty())
      throw ApiError(0, "input", "no sentence pool for language '" + lang + "'");
    return it->second;
  }

  std::string pick(Worker& w, const std::string& lang) {
    const auto& p = pool(lang);
    return p[std::uniform_int_distribution<std::size_t>(0, p.size() - 1)(w.rng)];
  }

  // A pool sentence whose length is within 1.5x of the source.
  std::string similar_length(Worker& w, const std::string& lang, const std::string& source) {
    const double n = static_cast<double>(std::max<std::size_t>(1, visible_chars(source)));
    std::string best;
    double best_gap = 1e9;
    for (int attempt = 0; attempt < 64; ++attempt) {
      auto cand = pick(w, lang);
      const double m = static_cast<double>(std::max<std::size_t>(1, visible_chars(cand)));
      const double ratio = std::max(n, m) / std::min(n, m);
      if (ratio <= 1.5) return cand;
      if (ratio < best_gap) {
        best_gap = ratio;
        best = std::move(cand);
      }
    }
    return best;
  }

  const SimConfig& config_;
  std::mutex mutex_;
  std::unordered_map<std::uint64_t, bool> truth_;
};

std::vector<std::string> exam_answers(const json& form, const ExamPoolData& pool, double accuracy,
                                      std::mt19937_64& rng) {
  std::set<std::pair<std::string, std::string>> known(pool.parallel.begin(), pool.parallel.end());
  std::vector<std::string> answers;
  for (const auto& item : form.at("items")) {
    const bool correct = known.count({item.at("src").get<std::string>(), item.at("tgt").get<std::string>()}) > 0;
    const bool right = std::bernoulli_distribution(accuracy)(rng);
    answers.push_back(correct == right ? "correct" : "incorrect");
  }
  return answers;
}

}  // namespace

SimConfig load_sim_data(const std::filesystem::path& data_dir, const std::vector<std::string>& directions) {
  SimConfig c;
  for (const auto& code : directions) {
    const auto [src, tgt] = split_direction(code);
    SimDirection d;
    d.direction = code;
    d.sources = read_lines(data_dir / "sim" / (src + ".txt"));
    const auto exam_dir = data_dir / "exam" / code;
    if (std::filesystem::is_directory(exam_dir)) {
      ExamPoolData e;
      e.parallel = read_pairs(exam_dir / "correct.tsv");
      e.glossary = read_pairs(exam_dir / "glossary.tsv");
      e.other_lang = read_lines(exam_dir / "otherlang.txt");
      d.exam = std::move(e);
    }
    for (const auto& lang : {src, tgt})
      if (!c.language_pools.count(lang)) {
        const auto path = data_dir / "sim" / (lang + ".txt");
        if (std::filesystem::exists(path)) c.language_pools[lang] = read_lines(path);
      }
    c.directions.push_back(std::move(d));
  }
  return c;
}

void apply_profiles(SimConfig& config, const json& j) {
  try {
    for (const auto& w : j.at("workers")) {
      SimWorkerProfile p;
      p.name = w.value("name", p.name);
      p.count = w.value("count", p.count);
      p.langs = w.at("langs").get<std::set<std::string>>();
      p.translates = w.value("translates", p.translates);
      p.verifies = w.value("verifies", p.verifies);
      p.g = w.value("g", p.g);
      p.q = w.value("q", p.q);
      if (w.contains("exam_accuracy")) p.exam_accuracy = w.at("exam_accuracy").get<double>();
      p.translate_median_ms = w.value("translate_median_ms", p.translate_median_ms);
      p.verify_median_ms = w.value("verify_median_ms", p.verify_median_ms);
      p.speed_sigma = w.value("speed_sigma", p.speed_sigma);
      p.cheat = parse_cheat_mode(w.value("cheat", std::string("none")));
      for (double v : {p.g, p.q, p.exam_accuracy.value_or(p.q)})
        if (!(v >= 0.0 && v <= 1.0)) throw ApiError(0, "input", "probabilities must lie in [0, 1]");
      config.workers.push_back(std::move(p));
    }
    config.concurrent = j.value("concurrent", config.concurrent);
    config.threads = j.value("threads", config.threads);
    if (j.contains("quotas"))
      for (auto& d : config.directions)
        if (j.at("quotas").contains(d.direction)) d.quota = j.at("quotas").at(d.direction).get<std::size_t>();
  } catch (const json::exception& e) {
    throw ApiError(0, "input", std::string("malformed profiles: ") + e.what());
  }
}

SimulationReport simulate(const std::string& host, int port, const SimConfig& config,
                          const std::string& requester_token) {
  ApiClient admin(host, port);
  admin.set_requester_token(requester_token);
  Run run(config);
  SimulationReport report;
  report.seed = config.seed;

  // Exams and sources.
  std::mt19937_64 setup_rng(config.seed);
  for (const auto& d : config.directions) {
    if (d.exam) {
      json pools = {{"parallel", json::array()}, {"glossary", json::array()}, {"other_lang", d.exam->other_lang}};
      for (const auto& [s, t] : d.exam->parallel) pools["parallel"].push_back({s, t});
      for (const auto& [s, t] : d.exam->glossary) pools["glossary"].push_back({s, t});
      admin.install_exam(d.direction, {{"pools", pools}, {"seed", config.seed}});
    }
    const auto [src, tgt] = split_direction(d.direction);
    std::size_t created = 0, next = 0;
    const auto quota = d.quota.value_or(config.sources_per_direction);
    while (created < quota && next < d.sources.size()) {
      const auto want = std::min(quota - created, d.sources.size() - next);
      std::vector<std::string> batch(d.sources.begin() + next, d.sources.begin() + next + want);
      next += want;
      const auto r = admin.upload_sources(src, "sim", batch, d.direction);
      created += r.at("tasks_created").get<std::size_t>();
    }
    run.per_direction_[d.direction].tasks = created;
  }

  // Registration and exams.
  std::vector<Worker> workers;
  for (std::size_t pi = 0; pi < config.workers.size(); ++pi) {
    const auto& p = config.workers[pi];
    for (std::size_t i = 1; i <= p.count; ++i) {
      Worker w;
      w.profile = &p;
      w.name = p.name + "-" + std::to_string(i);
      w.rng.seed(config.seed * 1'000'003 + pi * 10'007 + i);
      w.token = admin.register_worker(w.name, p.langs).token;
      if (p.verifies) {
        for (const auto& d : config.directions) {
          const auto [src, tgt] = split_direction(d.direction);
          if (!d.exam || !p.langs.count(src) || !p.langs.count(tgt)) continue;
          const auto form = admin.exam(w.token, d.direction);
          const auto answers = exam_answers(form, *d.exam, p.exam_accuracy.value_or(p.q), w.rng);
          const auto result = admin.answer_exam(w.token, d.direction, form.at("version"), answers);
          if (result.at("passed").get<bool>()) w.can_verify = true;
          else report.exam_failures.push_back(w.name + ":" + d.direction);
        }
      }
      workers.push_back(std::move(w));
    }
  }

  auto try_translate = [&](ApiClient& client, Worker& w) {
    if (!w.profile->translates) return false;
    auto task = client.next_task(w.token, "translate");
    if (!task) return false;
    std::int64_t elapsed = 0;
    const auto text = run.translate(w, *task, elapsed);
    const auto outcome = client.submit_translation(w.token, task->at("task_id"), text, elapsed);
    run.record(task->at("direction"), outcome);
    return true;
  };
  auto try_verify = [&](ApiClient& client, Worker& w) {
    if (!w.can_verify) return false;
    auto task = client.next_task(w.token, "verify");
    if (!task) return false;
    std::int64_t elapsed = 0;
    const auto verdict = run.judge(w, *task, elapsed);
    client.submit_verdict(w.token, task->at("assignment_id"), verdict, elapsed);
    return true;
  };

  if (!config.concurrent) {
    // Each round every translator takes one task, then verifiers drain the queue.
    for (bool progress = true; progress;) {
      progress = false;
      for (auto& w : workers) progress |= try_translate(admin, w);
      for (bool verified = true; verified;) {
        verified = false;
        for (auto& w : workers) verified |= try_verify(admin, w);
        progress |= verified;
      }
    }
  } else {
    std::atomic<std::uint64_t> progress{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    const std::size_t n = std::max<std::size_t>(1, std::min(config.threads, workers.size()));
    for (std::size_t t = 0; t < n; ++t) {
      threads.emplace_back([&, t] {
        try {
          ApiClient client(host, port);
          std::size_t idle = 0;
          std::uint64_t seen = progress.load();
          while (!failed && idle < 50) {
            bool did = false;
            for (std::size_t i = t; i < workers.size(); i += n) {
              did |= try_verify(client, workers[i]);
              did |= try_translate(client, workers[i]);
            }
            if (did) {
              ++progress;
              idle = 0;
              continue;
            }
            const auto now = progress.load();
            idle = now == seen ? idle + 1 : 0;
            seen = now;
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
          }
        } catch (const std::exception& e) {
          std::lock_guard lock(failure_mutex);
          failure = e.what();
          failed = true;
        }
      });
    }
    for (auto& th : threads) th.join();
    if (failed) throw ApiError(0, "environment", "simulation thread failed: " + failure);
  }

  const auto funnel = parse_funnel(admin.funnel());
  for (const auto& d : config.directions) {
    auto r = run.per_direction_[d.direction];
    r.direction = d.direction;
    if (const auto* row = funnel.find(d.direction)) {
      r.translated = row->translated;
      r.fully_verified = row->fully_verified;
      r.in_corpus = row->in_corpus;
    }
    if (r.fully_verified < r.translated) report.starved_directions.push_back(d.direction);
    report.total.tasks += r.tasks;
    report.total.submitted += r.submitted;
    report.total.auto_rejected += r.auto_rejected;
    report.total.translated += r.translated;
    report.total.fully_verified += r.fully_verified;
    report.total.in_corpus += r.in_corpus;
    report.directions.push_back(r);
  }
  report.total.direction = "total";
  if (report.total.submitted) {
    report.acceptance_rate = static_cast<double>(report.total.in_corpus) / report.total.submitted;
    report.auto_reject_rate = static_cast<double>(report.total.auto_rejected) / report.total.submitted;
  }
  for (const auto& w : workers)
    if (!admin.me(w.token).at("flag").is_null()) report.flagged_workers.push_back(w.name);
  report.cost = admin.cost();
  report.cost.erase("display");
  return report;
}

const FunnelRow* Funnel::find(const std::string& direction) const {
  for (const auto& [d, row] : directions)
    if (d == direction) return &row;
  return nullptr;
}

Funnel parse_funnel(const json& j) {
  auto row = [](const json& r) {
    return FunnelRow{r.at("translated").get<std::size_t>(), r.at("fully_verified").get<std::size_t>(),
                     r.at("in_corpus").get<std::size_t>()};
  };
  Funnel f;
  f.total = row(j.at("total"));
  for (const auto& d : j.at("directions")) f.directions.emplace_back(d.at("direction").get<std::string>(), row(d));
  return f;
}

json to_json(const SimulationReport& r) {
  auto dir = [](const DirectionReport& d) {
    return json{{"direction", d.direction},         {"tasks", d.tasks},
                {"submitted", d.submitted},         {"auto_rejected", d.auto_rejected},
                {"translated", d.translated},       {"fully_verified", d.fully_verified},
                {"in_corpus", d.in_corpus}};
  };
  json dirs = json::array();
  for (const auto& d : r.directions) dirs.push_back(dir(d));
  return {{"seed", r.seed},
          {"directions", dirs},
          {"total", dir(r.total)},
          {"acceptance_rate", r.acceptance_rate},
          {"auto_reject_rate", r.auto_reject_rate},
          {"flagged_workers", r.flagged_workers},
          {"exam_failures", r.exam_failures},
          {"starved_directions", r.starved_directions},
          {"cost", r.cost}};
}

}  // namespace corpusforge::sim
