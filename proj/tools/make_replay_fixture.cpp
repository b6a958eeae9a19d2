// Writes a JSONL event log that, replayed through the API, reproduces the
// published per-direction funnel counts.
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "corpusforge/exam.hpp"
#include "corpusforge/ingest.hpp"
#include "corpusforge/quality.hpp"
#include "corpusforge/service.hpp"
#include "corpusforge/store.hpp"

#ifndef CORPUSFORGE_DATA_DIR
#define CORPUSFORGE_DATA_DIR "data"
#endif

using namespace corpusforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Target {
  std::string direction;
  std::size_t translated, verified, in_corpus;
};

const std::vector<Target> kTable = {
    {"fuv-eng", 220, 88, 53},
    {"eng-fuv", 311, 286, 176},
    {"che-rus", 491, 491, 380},
    {"rus-che", 605, 605, 469},
};

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(' ') != std::string::npos) out.push_back(std::move(line));
  }
  return out;
}

std::size_t code_points(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

// The seed text for the two small languages is short phrases; sentences are
// built by joining a few of them.
std::vector<std::string> compose(const std::vector<std::string>& phrases, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::string> out;
  std::uniform_int_distribution<std::size_t> pick(0, phrases.size() - 1), parts(2, 4);
  std::set<std::string> seen;
  for (std::size_t guard = 0; out.size() < count && guard < count * 50; ++guard) {
    std::string s;
    const auto n = parts(rng);
    for (std::size_t i = 0; i < n; ++i) {
      auto p = phrases[pick(rng)];
      if (code_points(p) > 160) continue;
      if (!s.empty()) s += ", ";
      s += p;
    }
    if (code_points(s) < 20 || code_points(s) > 300 || !seen.insert(s).second) continue;
    out.push_back(std::move(s));
  }
  return out;
}

// Runs candidates through the real ingestion path and keeps what survives,
// in order, avoiding anything already taken.
std::vector<std::string> admissible(const std::vector<std::string>& candidates, const std::string& lang,
                                    const langid::Detector& detector, std::set<std::string>& taken,
                                    std::size_t need) {
  store::Store scratch;
  std::vector<ingest::RawLine> lines;
  for (const auto& c : candidates)
    if (!taken.count(c)) lines.push_back({c, "fixture"});
  std::vector<SourceId> kept;
  ingest::ingest(scratch, lines, lang, detector, {}, &kept);
  std::vector<std::string> out;
  scratch.read([&](const store::State& s) {
    for (auto id : kept) {
      if (out.size() == need) break;
      const auto& text = s.sources.at(id).text;
      if (taken.insert(text).second) out.push_back(text);
    }
  });
  if (out.size() < need) throw std::runtime_error(fmt::format("only {} of {} {} sources usable", out.size(), need, lang));
  return out;
}

// A target-language text that clears the automatic checks against src.
std::string translation_for(const std::string& src, const Direction& d, const std::vector<std::string>& pool,
                            const langid::Detector& detector, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int attempt = 0; attempt < 10'000; ++attempt) {
    const auto& t = pool[pick(rng)];
    if (t == src || !qc::length_ratio_check(src, t, 2.0).pass) continue;
    const auto r = qc::auto_check(t, src, d, detector);
    if (r.passed && r.detected_lang == d.tgt) return t;
  }
  throw std::runtime_error("no admissible " + d.tgt + " translation for: " + src);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"build the funnel replay fixture"};
  std::string data_dir = CORPUSFORGE_DATA_DIR, out_path;
  std::uint64_t seed = 2023;
  app.add_option("--data", data_dir);
  app.add_option("--seed", seed);
  app.add_option("--out", out_path)->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path data(data_dir);
    service::ServiceConfig config;
    for (const auto& entry : fs::directory_iterator(data / "langid" / "train"))
      if (entry.path().extension() == ".txt") config.train_texts[entry.path().stem().string()] = entry.path();
    const auto detector = service::load_detector(config);
    std::mt19937_64 rng(seed);

    std::map<std::string, std::vector<std::string>> pools;
    pools["che"] = compose(read_lines(data / "langid" / "train" / "che.txt"), 6000, rng);
    pools["fuv"] = compose(read_lines(data / "langid" / "train" / "fuv.txt"), 3000, rng);
    pools["rus"] = read_lines(data / "sim" / "rus.txt");
    pools["eng"] = read_lines(data / "sim" / "eng.txt");

    std::set<std::string> taken;
    std::map<std::string, std::vector<std::string>> sources;
    for (const auto& t : kTable) {
      const auto d = Direction::parse(t.direction);
      sources[t.direction] = admissible(pools.at(d.src), d.src, *detector, taken, t.translated);
    }

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    auto emit = [&](const std::string& event, const std::string& direction, json payload) {
      json ev = {{"event", event}, {"payload", std::move(payload)}};
      if (!direction.empty()) ev["direction"] = direction;
      out << ev.dump() << '\n';
    };

    json expected = json::object();
    for (const auto& t : kTable)
      expected[t.direction] = {{"translated", t.translated}, {"fully_verified", t.verified}, {"in_corpus", t.in_corpus}};
    emit("meta", "", {{"seed", seed}, {"expected", expected}});

    const std::set<std::string> all_langs = {"che", "rus", "fuv", "eng"};
    const std::vector<std::string> verifiers = {"verifier-1", "verifier-2", "verifier-3"};
    emit("worker", "", {{"name", "translator-1"}, {"langs", all_langs}});
    for (const auto& v : verifiers) emit("worker", "", {{"name", v}, {"langs", all_langs}});

    for (const auto& t : kTable) {
      const auto d = Direction::parse(t.direction);
      const auto form = exam::build_exam(d, exam::load_pools(data / "exam" / t.direction), seed);
      emit("exam_setup", t.direction, {{"form", form}});
      std::vector<std::string> answers;
      for (const auto& item : form.items) answers.emplace_back(exam::to_string(item.true_label));
      for (const auto& v : verifiers)
        emit("exam", t.direction, {{"worker", v}, {"answers", answers}, {"expect_passed", true}});
    }

    std::uniform_int_distribution<std::int64_t> translate_ms(12'000, 90'000), verify_ms(4'000, 30'000);
    auto run_direction = [&](const Target& t, std::size_t from, std::size_t to, std::size_t& accepted_left,
                             std::size_t& verified_left) {
      const auto d = Direction::parse(t.direction);
      const std::vector<std::string> batch(sources[t.direction].begin() + from, sources[t.direction].begin() + to);
      emit("source", t.direction, {{"lang", d.src}, {"origin", "fixture"}, {"lines", batch}});
      for (const auto& src : batch) {
        const auto text = translation_for(src, d, pools.at(d.tgt), *detector, rng);
        emit("translate", t.direction,
             {{"worker", "translator-1"}, {"source", src}, {"text", text}, {"elapsed_ms", translate_ms(rng)},
              {"expect", "queued_for_verification"}});
        if (verified_left == 0) continue;
        // Accepted and rejected translations are spread evenly over the run.
        const bool accept = std::bernoulli_distribution(double(accepted_left) / double(verified_left))(rng);
        --verified_left;
        if (accept) --accepted_left;
        std::vector<std::string> verdicts = accept ? std::vector<std::string>{"good", "good", "bad"}
                                                   : std::vector<std::string>{"bad", "bad", "good"};
        if (std::bernoulli_distribution(0.5)(rng)) verdicts[2] = verdicts[0];
        std::shuffle(verdicts.begin(), verdicts.end(), rng);
        for (std::size_t i = 0; i < verifiers.size(); ++i)
          emit("verdict", t.direction,
               {{"worker", verifiers[i]}, {"source", src}, {"translation", text}, {"verdict", verdicts[i]},
                {"elapsed_ms", verify_ms(rng)}});
      }
    };

    // Every direction is verified as far as the table says; the unverified
    // tail of fuv-eng comes last, once all verifications are done.
    std::map<std::string, std::pair<std::size_t, std::size_t>> left;
    for (const auto& t : kTable) left[t.direction] = {t.in_corpus, t.verified};
    for (const auto& t : kTable) run_direction(t, 0, t.verified, left[t.direction].first, left[t.direction].second);
    for (const auto& t : kTable)
      if (t.verified < t.translated)
        run_direction(t, t.verified, t.translated, left[t.direction].first, left[t.direction].second);
    std::cerr << "wrote " << out_path << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
