#include <algorithm>
#include <array>
#include <random>

#include <doctest.h>

#include "corpusforge/error.hpp"
#include "corpusforge/quality.hpp"
#include "support.hpp"

using namespace corpusforge;
using namespace corpusforge::qc;

TEST_CASE("length_ratio_check examples") {
  const std::string s30(30, 'a'), s90(90, 'b'), s20(20, 'c'), s61(61, 'd');
  auto r = length_ratio_check(s30, s90);
  CHECK(r.pass);
  CHECK(r.ratio == doctest::Approx(3.0));
  r = length_ratio_check(s20, s61);
  CHECK_FALSE(r.pass);
  CHECK(r.ratio == doctest::Approx(3.05));
  r = length_ratio_check("same text", "same text");
  CHECK(r.pass);
  CHECK(r.ratio == 1.0);
}

TEST_CASE("length_ratio_check counts code points and ignores whitespace") {
  // Six Cyrillic letters are twelve bytes but six characters.
  CHECK(length_ratio_check("привет", "abcdef").ratio == 1.0);
  CHECK(length_ratio_check("a b c", "abc").ratio == 1.0);
  CHECK(length_ratio_check("  ab\t", "abcdef").ratio == 3.0);
  CHECK_THROWS_AS(length_ratio_check("   ", "abc"), Error);
  CHECK_THROWS_AS(length_ratio_check("abc", ""), Error);
}

TEST_CASE("aggregate_verdicts examples") {
  using enum Verdict;
  CHECK(aggregate_verdicts(std::array{good, good, good}) == Decision::accepted);
  CHECK(aggregate_verdicts(std::array{good, bad, good}) == Decision::accepted);
  CHECK(aggregate_verdicts(std::array{bad, good, bad}) == Decision::rejected);
  CHECK_THROWS_AS(aggregate_verdicts(std::array{good, good}), Error);
  CHECK_THROWS_AS(aggregate_verdicts(std::array{good, good, good, bad}), Error);
}

TEST_CASE("flag_fast_responses examples") {
  const FastThresholds t;
  const WorkerId w{7};
  std::vector<Response> three_fast(3, Response{TaskKind::translate, 1000});
  const auto flag = flag_fast_responses(w, three_fast, t, 42);
  REQUIRE(flag);
  CHECK(flag->reason == "fast_responses");
  CHECK(flag->evidence_count == 3);
  CHECK(flag->flagged_at == 42);

  std::vector<Response> one_fast = {{TaskKind::translate, 1000}};
  for (int i = 0; i < 20; ++i) one_fast.push_back({TaskKind::translate, 40'000});
  CHECK_FALSE(flag_fast_responses(w, one_fast, t, 0));
  CHECK_FALSE(flag_fast_responses(w, {}, t, 0));

  // Thresholds are per kind: 5 s is fast for translation but not for verification.
  std::vector<Response> verify(5, Response{TaskKind::verify, 5000});
  CHECK_FALSE(flag_fast_responses(w, verify, t, 0));
  std::vector<Response> at_threshold(5, Response{TaskKind::translate, 10'000});
  CHECK_FALSE(flag_fast_responses(w, at_threshold, t, 0));
}

TEST_CASE("auto_check") {
  const auto det = testing::detector({"che", "rus", "eng", "fuv"});
  const Direction che_rus{"che", "rus"};
  const std::string che = "Нохчийн Республика, Юккъера Австрали, малхбузен аьхкенан хан";
  const std::string rus = "Вчера в центре города открылась новая библиотека, где каждый может читать книги.";

  SUBCASE("good pair passes") {
    const auto r = auto_check(rus, che, che_rus, *det);
    CHECK(r.passed);
    CHECK_FALSE(r.failed_check);
    CHECK(r.detected_lang == "rus");
    REQUIRE(r.length_ratio);
  }
  SUBCASE("whitespace-only translation") {
    const auto r = auto_check("  \t ", che, che_rus, *det);
    CHECK_FALSE(r.passed);
    CHECK(r.failed_check == FailedCheck::empty);
    CHECK_FALSE(r.length_ratio);
  }
  SUBCASE("copy of the source is caught by the language check") {
    const auto r = auto_check(che, che, che_rus, *det);
    CHECK_FALSE(r.passed);
    CHECK(r.failed_check == FailedCheck::language);
    CHECK(r.detected_lang == "che");
  }
  SUBCASE("ratio four fails on length before language") {
    const std::string src(10, 'x');
    const auto r = auto_check(std::string(40, 'y'), src, {"eng", "fuv"}, *det);
    CHECK(r.failed_check == FailedCheck::length);
    CHECK(*r.length_ratio == doctest::Approx(4.0));
  }
  SUBCASE("unconfident detections pass through") {
    const auto r = auto_check("Ok, sure thing", "Хорошо, конечно", {"rus", "eng"}, *det);
    CHECK(r.passed);
    CHECK_FALSE(r.detected_lang);
  }
  SUBCASE("missing profile") {
    CHECK_THROWS_AS(auto_check("x", "y", {"deu", "rus"}, *det), Error);
  }
}

TEST_CASE("auto_check never rejects on an abstention and never accepts empty") {
  const auto det = testing::detector({"che", "rus", "eng", "fuv"});
  std::mt19937_64 rng(5);
  const auto pool = testing::read_lines(testing::data_dir() / "langid" / "heldout" / "deu.txt", 300);
  for (int i = 0; i < 300; ++i) {
    const auto& src = pool[rng() % pool.size()];
    const auto& tgt = pool[rng() % pool.size()];
    const auto r = auto_check(tgt, src, {"eng", "rus"}, *det);
    const auto d = det->detect(tgt);
    if (r.failed_check == FailedCheck::language) CHECK(d.confident);
    if (!d.confident && length_ratio_check(src, tgt).pass) CHECK(r.passed);
  }
  for (std::string blank : {"", " ", "\n\t"}) CHECK(auto_check(blank, "source text", {"eng", "rus"}, *det).failed_check ==
                                                   FailedCheck::empty);
}
