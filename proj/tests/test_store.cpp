#include <filesystem>
#include <fstream>
#include <random>

#include <doctest.h>

#include "corpusforge/corpus.hpp"
#include "corpusforge/engine.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/ingest.hpp"
#include "corpusforge/store.hpp"
#include "support.hpp"

using namespace corpusforge;
using store::TaskState;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("corpusforge-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, std::string_view bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Drives random pipeline traffic against one store: ingest, translate (good or
// copied), verify with random verdicts, let reservations lapse.
struct Traffic {
  store::Store& store;
  testing::ManualClock clock;
  std::shared_ptr<const langid::Detector> detector = testing::detector(testing::all_languages());
  engine::TaskEngine engine{store, detector, {}, clock.clock()};
  std::vector<std::pair<std::string, std::string>> pairs = testing::fixture_pairs("che-rus");
  std::vector<WorkerId> workers;
  std::size_t next_source = 0;
  std::mt19937_64 rng;

  Traffic(store::Store& s, std::uint64_t seed, int n_workers = 5) : store(s), rng(seed) {
    const Direction d{"che", "rus"};
    engine.install_exam(exam::build_exam(d, exam::load_pools(testing::data_dir() / "exam" / "che-rus"), 1));
    const auto form = engine.exam_form(d);
    std::vector<exam::Label> answers;
    for (const auto& item : form.items) answers.push_back(item.true_label);
    for (int i = 0; i < n_workers; ++i) {
      workers.push_back(engine.register_worker("w" + std::to_string(i), {"che", "rus"}).worker.id);
      engine.grade_exam(workers.back(), d, form.version, answers);
    }
  }

  std::string translation_of(const std::string& source) const {
    for (const auto& [s, t] : pairs)
      if (s == source) return t;
    return "Перевод не найден в наборе данных, но это всё равно русский текст.";
  }

  void step() {
    const auto w = workers[rng() % workers.size()];
    switch (rng() % 8) {
      case 0: {
        if (next_source >= pairs.size()) break;
        std::vector<ingest::RawLine> lines{{pairs[next_source++].first, "t"}};
        std::vector<SourceId> ids;
        ingest::ingest(store, lines, "che", *detector, {}, &ids);
        engine.create_translation_tasks(ids, {"che", "rus"});
        break;
      }
      case 1:
      case 2:
      case 3: {
        auto h = engine.assign_next(w, TaskKind::translate);
        if (!h) break;
        if (rng() % 10 == 0) break;  // abandoned; the deadline reclaims it
        const auto text = rng() % 6 == 0 ? h->source : translation_of(h->source);
        engine.submit_translation(h->task, w, text, 20'000 + static_cast<std::int64_t>(rng() % 60'000));
        break;
      }
      case 7:
        clock.advance(static_cast<Timestamp>(rng() % (engine.config().translate_deadline_ms / 4)));
        break;
      default: {
        auto h = engine.assign_next(w, TaskKind::verify);
        if (!h || rng() % 12 == 0) break;
        engine.submit_verdict(*h->assignment, w, rng() % 3 ? Verdict::good : Verdict::bad, 15'000);
        break;
      }
    }
  }
};

// Counts the funnel straight from the rows, independent of corpus::funnel_stats.
corpus::FunnelCounts recount(const store::State& s, const std::string& code) {
  corpus::FunnelCounts c;
  for (const auto& [id, tr] : s.translations) {
    const auto& task = s.tasks.at(tr.task);
    if (task.direction.code() != code || !tr.check.passed) continue;
    ++c.translated;
    int verdicts = 0;
    for (const auto& [aid, a] : s.assignments)
      if (a.translation == id && a.verdict) ++verdicts;
    if (verdicts == 3) ++c.fully_verified;
    if (task.state == TaskState::accepted) ++c.in_corpus;
  }
  return c;
}

}  // namespace

TEST_CASE("snapshot round trip") {
  store::Store a;
  Traffic t(a, 1);
  for (int i = 0; i < 400; ++i) t.step();
  const auto bytes = a.snapshot();

  store::Store b;
  b.restore(bytes);
  CHECK(b.snapshot() == bytes);
  CHECK(corpus::funnel_stats(a) == corpus::funnel_stats(b));
  b.read([&](const store::State& s) {
    a.read([&](const store::State& r) {
      CHECK(s.open_tasks == r.open_tasks);
      CHECK(s.assignments_by_translation == r.assignments_by_translation);
      CHECK(s.passed_exams == r.passed_exams);
      CHECK(s.ledger.totals().grand == r.ledger.totals().grand);
    });
  });

  SUBCASE("truncated or altered bytes are integrity errors") {
    for (std::size_t cut : {std::size_t{0}, std::size_t{4}, bytes.size() / 2, bytes.size() - 1}) {
      try {
        store::Store c;
        c.restore(bytes.substr(0, cut));
        FAIL("expected an integrity error");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::integrity);
      }
    }
    auto flipped = bytes;
    flipped[flipped.size() / 2] ^= 0x20;
    store::Store c;
    CHECK_THROWS_AS(c.restore(flipped), Error);
  }
  SUBCASE("empty store") {
    store::Store e, f;
    f.restore(e.snapshot());
    CHECK(f.snapshot() == e.snapshot());
    CHECK(corpus::funnel_stats(f).total == corpus::FunnelCounts{});
  }
}

TEST_CASE("file-backed store reopens to the same state") {
  const auto dir = scratch("reopen");
  const auto path = dir / "state.bin";
  std::string before;
  {
    store::Store s(path);
    Traffic t(s, 2);
    for (int i = 0; i < 300; ++i) t.step();
    before = s.snapshot();
  }
  {
    store::Store s(path);
    CHECK(s.snapshot() == before);
    s.checkpoint();
  }
  store::Store s(path);
  CHECK(s.snapshot() == before);
  fs::remove_all(dir);
}

TEST_CASE("a journal cut at any byte replays to a committed prefix") {
  const auto dir = scratch("torn");
  const auto path = dir / "state.bin";
  std::vector<std::string> states;
  std::string base, wal;
  {
    store::Store s(path);
    base = slurp(path);
    states.push_back(s.snapshot());
    Traffic t(s, 3);
    for (int i = 0; i < 250; ++i) {
      t.step();
      if (states.back() != s.snapshot()) states.push_back(s.snapshot());
    }
    wal = slurp(path.string() + ".wal");
  }
  REQUIRE(!wal.empty());

  auto reopen = [&](std::string_view journal) {
    const auto trial = dir / "trial.bin";
    spit(trial, base);
    spit(trial.string() + ".wal", journal);
    store::Store s(trial);
    return s.snapshot();
  };

  // State after each complete journal line.
  std::vector<std::size_t> ends = {0};
  for (std::size_t i = 0; i < wal.size(); ++i)
    if (wal[i] == '\n') ends.push_back(i + 1);
  REQUIRE(ends.back() == wal.size());
  std::vector<std::string> at_line;
  for (auto e : ends) at_line.push_back(reopen(std::string_view(wal).substr(0, e)));
  CHECK(at_line.front() == states.front());
  CHECK(at_line.back() == states.back());

  // Every state seen between traffic steps is one of the line states, in order.
  std::size_t pos = 0;
  for (const auto& st : states) {
    while (pos < at_line.size() && at_line[pos] != st) ++pos;
    CHECK_MESSAGE(pos < at_line.size(), "a committed state is missing from the journal");
  }

  // Any cut inside a line replays exactly the lines before it.
  std::mt19937_64 rng(9);
  for (int i = 0; i < 60; ++i) {
    const auto cut = rng() % wal.size();
    const auto complete = static_cast<std::size_t>(std::upper_bound(ends.begin(), ends.end(), cut) - ends.begin()) - 1;
    CHECK_MESSAGE(reopen(std::string_view(wal).substr(0, cut)) == at_line[complete], "cut at " << cut);
  }

  SUBCASE("corrupt line ends the replay") {
    auto bad = wal;
    const auto nl = bad.find('\n');
    REQUIRE(nl != std::string::npos);
    bad[nl / 2] ^= 0x01;
    const auto trial = dir / "corrupt.bin";
    spit(trial, base);
    spit(trial.string() + ".wal", bad);
    store::Store s(trial);
    CHECK(s.snapshot() == states.front());
  }
  fs::remove_all(dir);
}

TEST_CASE("failed operations leave memory and file in step") {
  const auto dir = scratch("throw");
  const auto path = dir / "state.bin";
  std::string before;
  {
    store::Store s(path);
    Traffic t(s, 4);
    for (int i = 0; i < 100; ++i) t.step();
    // Let reservations lapse, then fail an operation: the sweep that ran first
    // must still reach the journal.
    t.clock.advance(t.engine.config().translate_deadline_ms + 1);
    CHECK_THROWS_AS(t.engine.submit_translation(TaskId{999'999}, t.workers[0], "x", 1), Error);
    before = s.snapshot();
  }
  store::Store s(path);
  CHECK(s.snapshot() == before);
  fs::remove_all(dir);
}

TEST_CASE("funnel stays ordered and matches a row recount under random traffic") {
  for (std::uint64_t seed = 10; seed < 13; ++seed) {
    store::Store s;
    Traffic t(s, seed);
    for (int i = 0; i < 600; ++i) {
      t.step();
      s.read([&](const store::State& st) {
        const auto stats = corpus::funnel_stats(st);
        const auto* c = stats.find("che-rus");
        const auto oracle = recount(st, "che-rus");
        if (!c) {
          CHECK(oracle == corpus::FunnelCounts{});
          return;
        }
        CHECK(*c == oracle);
        CHECK(c->in_corpus <= c->fully_verified);
        CHECK(c->fully_verified <= c->translated);
        CHECK(stats.total == *c);
      });
    }
    const auto tsv = corpus::export_corpus(s, {"che", "rus"}, corpus::ExportFormat::tsv);
    const auto jsonl = corpus::export_corpus(s, {"che", "rus"}, corpus::ExportFormat::jsonl);
    const auto in_corpus = corpus::funnel_stats(s).find("che-rus")->in_corpus;
    CHECK(static_cast<std::size_t>(std::count(tsv.begin(), tsv.end(), '\n')) == in_corpus);
    CHECK(static_cast<std::size_t>(std::count(jsonl.begin(), jsonl.end(), '\n')) == in_corpus);
    std::istringstream lines(tsv);
    for (std::string line; std::getline(lines, line);) CHECK(std::count(line.begin(), line.end(), '\t') == 1);
    std::istringstream records(jsonl);
    for (std::string line; std::getline(records, line);) {
      const auto rec = nlohmann::json::parse(line);
      CHECK(rec.at("verdicts").size() == 3);
      CHECK(rec.contains("accepted_at"));
    }
  }
}
