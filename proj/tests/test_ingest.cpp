#include <random>

#include <doctest.h>

#include "corpusforge/error.hpp"
#include "corpusforge/ingest.hpp"
#include "corpusforge/store.hpp"
#include "support.hpp"

using namespace corpusforge;
using namespace corpusforge::ingest;

namespace {

std::vector<RawLine> raw(const std::vector<std::string>& texts, const std::string& origin = "test") {
  std::vector<RawLine> out;
  for (const auto& t : texts) out.push_back({t, origin});
  return out;
}

std::vector<std::string> texts(const std::vector<RawLine>& lines) {
  std::vector<std::string> out;
  for (const auto& l : lines) out.push_back(l.text);
  return out;
}

std::size_t pool_size(const store::Store& s) {
  return s.read([](const store::State& st) { return st.sources.size(); });
}

}  // namespace

TEST_CASE("normalize_sentence examples") {
  CHECK(normalize_sentence("  Hello,   World! ") == "hello, world!");
  CHECK(normalize_sentence("В 1995 году") == "в 0 году");
  CHECK(normalize_sentence("") == "");
  CHECK(normalize_sentence("A1B22C333") == "a0b0c0");
  CHECK(normalize_sentence("\tTabs\nand  NEWLINES ") == "tabs and newlines");
  CHECK(normalize_sentence("ÀÉÎ") == "àéî");
}

TEST_CASE("normalize_sentence is idempotent") {
  for (std::string s : {"  Foo 12 bar  ", "Ахмат-Юрт 2001", "X is a village in Y 1234"}) {
    const auto once = normalize_sentence(s);
    CHECK(normalize_sentence(once) == once);
  }
}

TEST_CASE("filter_templates examples") {
  SUBCASE("three stubs with threshold two keep the first") {
    const auto split = filter_templates(raw({"stub", "stub", "stub"}), 2);
    CHECK(split.kept.size() == 1);
    CHECK(split.flagged.size() == 2);
  }
  SUBCASE("two stubs at threshold two both stay") {
    const auto split = filter_templates(raw({"stub", "stub"}), 2);
    CHECK(split.kept.size() == 2);
    CHECK(split.flagged.empty());
  }
  SUBCASE("case folds together") {
    const auto split = filter_templates(raw({"A river.", "A RIVER.", "Unique text."}), 1);
    CHECK(texts(split.kept) == std::vector<std::string>{"A river.", "Unique text."});
    CHECK(texts(split.flagged) == std::vector<std::string>{"A RIVER."});
  }
  SUBCASE("digit runs make numbered stubs one template") {
    const auto split = filter_templates(raw({"Village 1 in Y", "Village 22 in Y", "Village 333 in Y", "Other"}), 2);
    CHECK(texts(split.kept) == std::vector<std::string>{"Village 1 in Y", "Other"});
    CHECK(split.flagged.size() == 2);
  }
  SUBCASE("zero threshold is an input error") {
    CHECK_THROWS_AS(filter_templates(raw({"x"}), 0), Error);
  }
}

TEST_CASE("ingest keeps valid in-language lines and reports every drop") {
  const auto det = testing::detector({"che", "rus", "eng", "fuv"});
  const auto eng = testing::read_lines(testing::data_dir() / "sim" / "eng.txt", 400);
  std::vector<std::string> lines;
  for (const auto& l : eng)
    if (l.size() > 40 && l.size() < 400 && det->detect(l).lang == "eng" && det->detect(l).confident) lines.push_back(l);
  lines.resize(100);

  store::Store s;
  SUBCASE("clean batch") {
    const auto r = ingest::ingest(s, raw(lines), "eng", *det);
    CHECK(r.input_count == 100);
    CHECK(r.kept == 100);
    CHECK(r.dropped_template + r.dropped_duplicate + r.dropped_language + r.dropped_malformed == 0);
    CHECK(pool_size(s) == 100);
  }
  SUBCASE("second ingest is all duplicates") {
    ingest::ingest(s, raw(lines), "eng", *det);
    const auto r = ingest::ingest(s, raw(lines), "eng", *det);
    CHECK(r.kept == 0);
    CHECK(r.dropped_duplicate == r.input_count);
    CHECK(pool_size(s) == 100);
  }
  SUBCASE("wrong-language line is dropped") {
    const auto rus = testing::read_lines(testing::data_dir() / "langid" / "heldout" / "rus.txt", 5);
    auto batch = lines;
    batch.insert(batch.begin() + 10, rus.at(0));
    const auto r = ingest::ingest(s, raw(batch), "eng", *det);
    CHECK(r.dropped_language == 1);
    CHECK(r.kept == 100);
  }
  SUBCASE("malformed lines") {
    const auto r = ingest::ingest(s, raw({"   ", "too short", std::string(501, 'a'), lines[0]}), "eng", *det);
    CHECK(r.dropped_malformed == 3);
    CHECK(r.kept == 1);
  }
  SUBCASE("unknown language is a configuration error") {
    try {
      ingest::ingest(s, raw(lines), "xho", *det);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::configuration);
    }
  }
  SUBCASE("stored sentences carry origin and pool status") {
    std::vector<SourceId> ids;
    ingest::ingest(s, raw({lines[0], lines[1]}, "wiki-en"), "eng", *det, {}, &ids);
    REQUIRE(ids.size() == 2);
    s.read([&](const store::State& st) {
      const auto& row = st.sources.at(ids[0]);
      CHECK(row.origin == "wiki-en");
      CHECK(row.lang == "eng");
      CHECK(row.status == store::SourceStatus::pool);
      CHECK(row.text == lines[0]);
    });
  }
}

TEST_CASE("ingest conservation and determinism over mixed batches") {
  const auto det = testing::detector({"che", "rus", "eng", "fuv"});
  const auto eng = testing::read_lines(testing::data_dir() / "sim" / "eng.txt", 300);
  const auto rus = testing::read_lines(testing::data_dir() / "sim" / "rus.txt", 100);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::string> batch;
    std::uniform_int_distribution<int> kind(0, 5);
    for (int i = 0; i < 200; ++i) {
      switch (kind(rng)) {
        case 0: batch.push_back(rus[rng() % rus.size()]); break;
        case 1: batch.push_back("Item " + std::to_string(rng() % 1000) + " is a village"); break;
        case 2: batch.push_back("short"); break;
        default: batch.push_back(eng[rng() % eng.size()]); break;
      }
    }
    store::Store a, b;
    const auto ra = ingest::ingest(a, raw(batch), "eng", *det);
    const auto rb = ingest::ingest(b, raw(batch), "eng", *det);
    CHECK(ra.kept + ra.dropped_template + ra.dropped_duplicate + ra.dropped_language + ra.dropped_malformed ==
          ra.input_count);
    CHECK(nlohmann::json(ra) == nlohmann::json(rb));
    CHECK(a.snapshot() == b.snapshot());
  }
}
