#include <cmath>
#include <random>

#include <doctest.h>

#include "corpusforge/error.hpp"
#include "corpusforge/langid.hpp"
#include "corpusforge/text.hpp"
#include "support.hpp"

using namespace corpusforge;
using namespace corpusforge::langid;

namespace {

const std::vector<std::string> kLangs = {"eng", "rus", "deu", "spa", "che", "fuv"};

std::size_t rank_of(const Detection& d, const std::string& lang) {
  for (std::size_t i = 0; i < d.ranking.size(); ++i)
    if (d.ranking[i].first == lang) return i;
  return d.ranking.size();
}

// P(X >= k) for X ~ Binomial(n, 1/2).
double upper_tail(int n, int k) {
  double p = 0;
  for (int i = k; i <= n; ++i) p += std::exp(std::lgamma(n + 1) - std::lgamma(i + 1) - std::lgamma(n - i + 1) - n * std::log(2.0));
  return p;
}

}  // namespace

TEST_CASE("train_profile preconditions and determinism") {
  CHECK_THROWS_AS(train_profile(std::vector<std::string>{}, "eng"), Error);
  CHECK_THROWS_AS(train_profile(std::vector<std::string>{"too little text"}, "eng"), Error);

  auto lines = testing::read_lines(testing::data_dir() / "langid" / "train" / "eng.txt", 400);
  const auto a = train_profile(lines, "eng");
  std::reverse(lines.begin(), lines.end());
  const auto b = train_profile(lines, "eng");
  CHECK(a.total_ngrams() == b.total_ngrams());
  CHECK(a.vocabulary() == b.vocabulary());
  for (const auto& [gram, g] : a.ngrams()) {
    const auto other = b.find(gram);
    REQUIRE(other);
    CHECK(other->count == g.count);
    CHECK(other->logprob == g.logprob);
    CHECK(std::isfinite(g.logprob));
    CHECK(g.logprob <= 0.0);
  }
}

TEST_CASE("profiles round-trip through files") {
  const auto p = testing::profile("fuv");
  const auto path = std::filesystem::temp_directory_path() / "corpusforge-fuv-profile.json";
  save_profile(*p, path);
  const auto q = load_profile(path);
  std::filesystem::remove(path);
  CHECK(q.lang() == "fuv");
  CHECK(q.total_ngrams() == p->total_ngrams());
  CHECK(q.ngrams().size() == p->ngrams().size());
  CHECK_THROWS_AS(load_profile("/nonexistent/profile.json"), Error);
}

TEST_CASE("detect examples") {
  const auto det = testing::detector({"eng", "rus", "che", "fuv"});
  auto d = det->detect("The quick brown fox jumps over the lazy dog");
  CHECK(d.lang == "eng");
  CHECK(d.confident);
  CHECK(d.margin >= 0.0);
  CHECK_THROWS_AS(det->detect(""), Error);
  CHECK_THROWS_AS(det->detect("   "), Error);

  const auto rus = testing::profile("rus");
  const LangProfile* one[] = {rus.get()};
  CHECK_THROWS_AS(detect("привет мир, как дела у всех вас", one), Error);

  // The Russian profile scores Russian text above English text.
  const auto eng = testing::profile("eng");
  const LangProfile* two[] = {rus.get(), eng.get()};
  auto rus_score = [&](const Detection& det) {
    for (const auto& [l, score] : det.ranking)
      if (l == "rus") return score;
    FAIL("rus missing from the ranking");
    return 0.0;
  };
  const auto ru = detect("привет мир", two);
  const auto en = detect("hello world", two);
  CHECK(rus_score(ru) > rus_score(en));
  CHECK(ru.ranking.front().first == "rus");
  CHECK(en.ranking.front().first == "eng");
  // Under twenty characters always abstains.
  CHECK_FALSE(ru.confident);
  CHECK(ru.lang == kUndetermined);
}

TEST_CASE("confident iff a language won by the margin on a long enough text") {
  const auto det = testing::detector({"eng", "rus", "che", "fuv"});
  for (const auto& lang : {"eng", "rus"}) {
    const auto lines = testing::read_lines(testing::data_dir() / "langid" / "heldout" / (std::string(lang) + ".txt"), 200);
    for (const auto& l : lines) {
      const auto d = det->detect(l);
      CHECK(d.confident == (d.lang != "und" && d.margin >= det->margin_threshold()));
      REQUIRE(d.ranking.size() == 4);
      CHECK(d.ranking[0].second >= d.ranking[1].second);
    }
  }
}

TEST_CASE("scores stay finite on arbitrary Unicode") {
  const auto det = testing::detector({"eng", "rus", "che", "fuv"});
  std::mt19937 rng(3);
  std::uniform_int_distribution<std::uint32_t> cp(0x20, 0x2FFFF);
  for (int i = 0; i < 500; ++i) {
    std::u32string s;
    const int n = 1 + static_cast<int>(rng() % 60);
    for (int k = 0; k < n; ++k) {
      auto c = cp(rng);
      if (c >= 0xD800 && c <= 0xDFFF) c = 'x';
      s.push_back(c);
    }
    const auto utf8 = text::encode(s);
    if (prepare(utf8).find_first_not_of(U' ') == std::u32string::npos) continue;
    const auto d = det->detect(utf8);
    CHECK(std::isfinite(d.score));
    CHECK(std::isfinite(d.margin));
    for (const auto& [l, score] : d.ranking) CHECK(std::isfinite(score));
  }
}

TEST_CASE("appending in-language text does not hurt that language's rank") {
  const auto det = testing::detector(kLangs);
  std::mt19937_64 rng(17);
  int better = 0, worse = 0;
  const std::vector<std::string> langs = {"eng", "rus", "deu", "spa"};
  std::map<std::string, std::vector<std::string>> heldout, train;
  for (const auto& l : langs) {
    heldout[l] = testing::read_lines(testing::data_dir() / "langid" / "heldout" / (l + ".txt"), 500);
    train[l] = testing::read_lines(testing::data_dir() / "langid" / "train" / (l + ".txt"), 2000);
  }
  for (int i = 0; i < 1000; ++i) {
    const auto& l = langs[i % langs.size()];
    auto probe = heldout[l][rng() % heldout[l].size()].substr(0, 24);
    const auto before = rank_of(det->detect(probe), l);
    probe += " " + train[l][rng() % train[l].size()];
    const auto after = rank_of(det->detect(probe), l);
    if (after < before) ++better;
    if (after > before) ++worse;
  }
  // One-sided sign test: rank getting worse is not significantly more common.
  const int n = better + worse;
  if (n > 0) CHECK(upper_tail(n, worse) >= 0.01);
  CHECK(worse <= better);
}

TEST_CASE("evaluate examples") {
  const auto det = testing::detector(kLangs);
  CHECK_THROWS_AS(evaluate(*det, std::vector<std::pair<std::string, std::string>>{}), Error);
  const std::vector<std::pair<std::string, std::string>> unknown = {{"some text here for testing", "xho"}};
  CHECK_THROWS_AS(evaluate(*det, unknown), Error);

  const std::vector<std::pair<std::string, std::string>> one = {{"The parliament approved the budget on Tuesday.", "eng"}};
  const auto r = evaluate(*det, one);
  CHECK(((r.accuracy && *r.accuracy == 1.0) || r.abstention_rate == 1.0));

  std::vector<std::pair<std::string, std::string>> on_train, on_heldout;
  for (const auto& l : {"eng", "rus", "deu", "spa"}) {
    for (const auto& s : testing::read_lines(testing::data_dir() / "langid" / "train" / (std::string(l) + ".txt"), 300))
      if (s.size() >= 40) on_train.push_back({s, l});
    for (const auto& s : testing::read_lines(testing::data_dir() / "langid" / "heldout" / (std::string(l) + ".txt"), 300))
      if (s.size() >= 40) on_heldout.push_back({s, l});
  }
  const auto rt = evaluate(*det, on_train);
  const auto rh = evaluate(*det, on_heldout);
  REQUIRE(rt.accuracy);
  REQUIRE(rh.accuracy);
  CHECK(*rt.accuracy >= *rh.accuracy);

  std::size_t confusion_total = 0;
  for (const auto& [k, n] : rh.confusion) confusion_total += n;
  std::size_t confident = 0;
  for (const auto& [l, s] : rh.per_language) confident += s.confident;
  CHECK(confusion_total == confident);
  CHECK(rh.total == on_heldout.size());
}
