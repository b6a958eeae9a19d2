#include "corpusforge/exam.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "corpusforge/error.hpp"
#include "corpusforge/text.hpp"

namespace corpusforge::exam {

std::string_view to_string(Label l) { return l == Label::correct ? "correct" : "incorrect"; }

std::string_view to_string(DistractorKind k) {
  switch (k) {
    case DistractorKind::mismatch: return "mismatch";
    case DistractorKind::wrong_language: return "wrong_language";
    case DistractorKind::word_for_word: return "word_for_word";
  }
  return "unknown";
}

Label parse_label(std::string_view s) {
  if (s == "correct") return Label::correct;
  if (s == "incorrect") return Label::incorrect;
  fail(ErrorKind::input, "exam answer must be 'correct' or 'incorrect'");
}

Composition composition(const ExamForm& form) {
  Composition c;
  for (const auto& item : form.items) {
    if (!item.distractor) {
      ++c.correct;
      continue;
    }
    switch (*item.distractor) {
      case DistractorKind::mismatch: ++c.mismatch; break;
      case DistractorKind::wrong_language: ++c.wrong_language; break;
      case DistractorKind::word_for_word: ++c.word_for_word; break;
    }
  }
  return c;
}

namespace {

std::string lower(std::string_view s) {
  std::u32string cps = text::decode(s);
  for (auto& cp : cps) cp = text::to_lower(cp);
  return text::encode(cps);
}

bool is_word_char(char32_t cp) {
  return !text::is_space(cp) && !(cp < 0x80 && std::ispunct(static_cast<int>(cp))) &&
         cp != U'«' && cp != U'»' && cp != U'—' && cp != U'–' && cp != U'“' && cp != U'”';
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::input, "cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!text::trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

std::pair<std::string, std::string> split_tab(const std::string& line, const std::filesystem::path& path) {
  const auto tab = line.find('\t');
  if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
    fail(ErrorKind::input, "expected exactly one tab per line in " + path.string());
  return {line.substr(0, tab), line.substr(tab + 1)};
}

}  // namespace

void Glossary::add(std::string word, std::string translation) {
  senses_.try_emplace(lower(word), std::move(translation));
}

const std::string* Glossary::lookup(std::string_view word) const {
  if (auto it = senses_.find(lower(word)); it != senses_.end()) return &it->second;
  return nullptr;
}

ExamPools load_pools(const std::filesystem::path& dir) {
  ExamPools pools;
  for (const auto& line : read_lines(dir / "correct.tsv")) pools.parallel.push_back(split_tab(line, dir / "correct.tsv"));
  for (const auto& line : read_lines(dir / "glossary.tsv")) {
    auto [w, t] = split_tab(line, dir / "glossary.tsv");
    pools.glossary.add(std::move(w), std::move(t));
  }
  pools.other_lang = read_lines(dir / "otherlang.txt");
  return pools;
}

std::string word_for_word(std::string_view src, const Glossary& glossary) {
  std::string out;
  std::istringstream tokens{std::string(src)};
  std::string token;
  while (tokens >> token) {
    // Split off leading/trailing punctuation so "river." still hits "river".
    const auto cps = text::decode(token);
    std::size_t b = 0, e = cps.size();
    while (b < e && !is_word_char(cps[b])) ++b;
    while (e > b && !is_word_char(cps[e - 1])) --e;
    const auto core = text::encode(std::u32string_view(cps).substr(b, e - b));
    const std::string* sense = core.empty() ? nullptr : glossary.lookup(core);
    if (!out.empty()) out.push_back(' ');
    if (!sense) {
      out += token;
      continue;
    }
    out += text::encode(std::u32string_view(cps).substr(0, b));
    out += *sense;
    out += text::encode(std::u32string_view(cps).substr(e));
  }
  return out;
}

ExamForm build_exam(const Direction& direction, const ExamPools& pools, std::uint64_t seed) {
  if (pools.parallel.size() < kCorrect + kMismatch)
    fail(ErrorKind::input, fmt::format("exam needs at least {} parallel pairs, got {}", kCorrect + kMismatch,
                                       pools.parallel.size()));
  if (pools.glossary.empty()) fail(ErrorKind::input, "exam glossary is empty");
  if (pools.other_lang.empty()) fail(ErrorKind::input, "exam needs at least one other-language sentence");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(pools.parallel.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  // Two pairs whose swapped targets are not themselves listed translations,
  // so a mismatch item can never be a correct pair.
  const auto listed = [&](const std::string& s, const std::string& t) {
    return std::any_of(pools.parallel.begin(), pools.parallel.end(),
                       [&](const auto& p) { return p.first == s && p.second == t; });
  };
  const auto swappable = [&](std::size_t x, std::size_t y) {
    const auto& px = pools.parallel[order[x]];
    const auto& py = pools.parallel[order[y]];
    return !listed(px.first, py.second) && !listed(py.first, px.second);
  };
  std::size_t a = kCorrect, b = kCorrect + 1;
  while (b < order.size() && !swappable(a, b)) ++b;
  if (b == order.size()) fail(ErrorKind::input, "exam pool has no two pairs that can be mismatched");
  std::swap(order[kCorrect + 1], order[b]);
  b = kCorrect + 1;

  ExamForm form;
  form.direction = direction;
  form.version = fmt::format("{}/seed-{}", direction.code(), seed);
  for (std::size_t i = 0; i < kCorrect; ++i) {
    const auto& [s, t] = pools.parallel[order[i]];
    form.items.push_back({s, t, Label::correct, std::nullopt});
  }
  const auto& pa = pools.parallel[order[a]];
  const auto& pb = pools.parallel[order[b]];
  form.items.push_back({pa.first, pb.second, Label::incorrect, DistractorKind::mismatch});
  form.items.push_back({pb.first, pa.second, Label::incorrect, DistractorKind::mismatch});

  std::uniform_int_distribution<std::size_t> any_pair(0, pools.parallel.size() - 1);
  std::uniform_int_distribution<std::size_t> any_other(0, pools.other_lang.size() - 1);
  form.items.push_back({pools.parallel[any_pair(rng)].first, pools.other_lang[any_other(rng)], Label::incorrect,
                        DistractorKind::wrong_language});

  const std::size_t w1 = any_pair(rng);
  std::size_t w2 = any_pair(rng);
  if (pools.parallel.size() > 1)
    while (w2 == w1) w2 = any_pair(rng);
  for (std::size_t w : {w1, w2}) {
    const auto& src = pools.parallel[w].first;
    form.items.push_back({src, word_for_word(src, pools.glossary), Label::incorrect, DistractorKind::word_for_word});
  }

  std::shuffle(form.items.begin(), form.items.end(), rng);
  return form;
}

int score_answers(const ExamForm& form, std::span<const Label> answers) {
  if (answers.size() != form.items.size() || answers.size() != kItems)
    fail(ErrorKind::input, fmt::format("exam expects {} answers, got {}", kItems, answers.size()));
  int score = 0;
  for (std::size_t i = 0; i < answers.size(); ++i)
    if (answers[i] == form.items[i].true_label) ++score;
  return score;
}

boost::rational<std::int64_t> guess_pass_probability(int pass_threshold) {
  if (pass_threshold < 0 || pass_threshold > static_cast<int>(kItems))
    fail(ErrorKind::input, fmt::format("pass threshold must be in [0, {}]", kItems));
  // Sum of binomial coefficients C(10, k) for k >= threshold over 2^10.
  std::int64_t favourable = 0;
  std::int64_t c = 1;  // C(10, 0)
  for (int k = 0; k <= static_cast<int>(kItems); ++k) {
    if (k >= pass_threshold) favourable += c;
    c = c * (static_cast<std::int64_t>(kItems) - k) / (k + 1);
  }
  return {favourable, std::int64_t{1} << kItems};
}

void to_json(nlohmann::json& j, const ExamItem& item) {
  j = {{"src", item.src}, {"tgt", item.tgt}, {"true_label", to_string(item.true_label)}};
  if (item.distractor) j["distractor_kind"] = to_string(*item.distractor);
}

void from_json(const nlohmann::json& j, ExamItem& item) {
  item.src = j.at("src").get<std::string>();
  item.tgt = j.at("tgt").get<std::string>();
  item.true_label = parse_label(j.at("true_label").get<std::string>());
  item.distractor.reset();
  if (j.contains("distractor_kind")) {
    const auto k = j.at("distractor_kind").get<std::string>();
    if (k == "mismatch") item.distractor = DistractorKind::mismatch;
    else if (k == "wrong_language") item.distractor = DistractorKind::wrong_language;
    else if (k == "word_for_word") item.distractor = DistractorKind::word_for_word;
    else fail(ErrorKind::input, "unknown distractor kind '" + k + "'");
  }
  if ((item.true_label == Label::correct) != !item.distractor)
    fail(ErrorKind::input, "exam item label and distractor kind disagree");
}

void to_json(nlohmann::json& j, const ExamForm& form) {
  j = {{"direction", form.direction}, {"version", form.version}, {"items", form.items}};
}

void from_json(const nlohmann::json& j, ExamForm& form) {
  form.direction = j.at("direction").get<Direction>();
  form.version = j.at("version").get<std::string>();
  form.items = j.at("items").get<std::vector<ExamItem>>();
  if (form.items.size() != kItems) fail(ErrorKind::input, "exam form must have exactly 10 items");
}

void to_json(nlohmann::json& j, const ExamResult& r) {
  j = {{"worker", r.worker},   {"direction", r.direction}, {"form_version", r.form_version},
       {"score", r.score},     {"passed", r.passed},       {"taken_at", r.taken_at}};
}

void from_json(const nlohmann::json& j, ExamResult& r) {
  r.worker = j.at("worker").get<WorkerId>();
  r.direction = j.at("direction").get<Direction>();
  r.form_version = j.at("form_version").get<std::string>();
  r.score = j.at("score").get<int>();
  r.passed = j.at("passed").get<bool>();
  r.taken_at = j.at("taken_at").get<Timestamp>();
}

}  // namespace corpusforge::exam
