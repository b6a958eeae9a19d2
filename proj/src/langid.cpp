#include "corpusforge/langid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "corpusforge/error.hpp"
#include "corpusforge/ingest.hpp"
#include "corpusforge/text.hpp"

namespace corpusforge::langid {

namespace {

constexpr std::string_view kFormat = "corpusforge-langid";
constexpr int kVersion = 1;

int order_of(std::string_view gram) {
  int n = 0;
  for (unsigned char c : gram)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

}  // namespace

LangProfile::LangProfile(std::string lang, std::unordered_map<std::string, std::uint32_t> counts)
    : lang_(std::move(lang)) {
  if (counts.empty()) fail(ErrorKind::training, "profile for '" + lang_ + "' has no n-grams");
  grams_.reserve(counts.size());
  for (auto& [gram, count] : counts) {
    const int n = order_of(gram);
    if (n < kMinOrder || n > kMaxOrder || count == 0)
      fail(ErrorKind::integrity, "invalid n-gram entry in profile '" + lang_ + "'");
    order_total_[n - 1] += count;
    order_vocab_[n - 1] += 1;
    total_ += count;
  }
  // Laplace over the observed vocabulary plus one bucket for unseen grams.
  std::array<double, kMaxOrder> denom{};
  for (int i = 0; i < kMaxOrder; ++i) {
    denom[i] = std::log(static_cast<double>(order_total_[i] + order_vocab_[i] + 1));
    unseen_[i] = -denom[i];
  }
  for (auto& [gram, count] : counts) {
    const int n = order_of(gram);
    grams_.emplace(gram, Gram{count, std::log(static_cast<double>(count) + 1.0) - denom[n - 1]});
  }
}

double LangProfile::logprob(const std::string& gram, int order) const {
  if (auto it = grams_.find(gram); it != grams_.end()) return it->second.logprob;
  return unseen_[order - 1];
}

double LangProfile::logprob(const std::string& gram, int order, std::uint64_t vocabulary) const {
  const double denom = std::log(static_cast<double>(order_total_[order - 1] + vocabulary + 1));
  if (auto it = grams_.find(gram); it != grams_.end())
    return std::log(static_cast<double>(it->second.count) + 1.0) - denom;
  return -denom;
}

JointVocabulary joint_vocabulary(std::span<const LangProfile* const> profiles) {
  std::array<std::unordered_set<std::string_view>, kMaxOrder> seen;
  for (const auto* p : profiles)
    for (const auto& [gram, g] : p->ngrams()) seen[order_of(gram) - 1].insert(gram);
  JointVocabulary v{};
  for (int i = 0; i < kMaxOrder; ++i) v[i] = seen[i].size();
  return v;
}

std::optional<LangProfile::Gram> LangProfile::find(const std::string& gram) const {
  if (auto it = grams_.find(gram); it != grams_.end()) return it->second;
  return std::nullopt;
}

namespace {

// Vowel points and other combining marks are optional in most scripts that
// use them, so they are dropped before counting.
bool is_optional_mark(char32_t cp) {
  return (cp >= 0x0300 && cp <= 0x036F) || (cp >= 0x0483 && cp <= 0x0489) ||
         (cp >= 0x0591 && cp <= 0x05C7) || (cp >= 0x0610 && cp <= 0x061A) ||
         (cp >= 0x064B && cp <= 0x065F) || cp == 0x0670 || cp == 0x0640 ||
         (cp >= 0x06D6 && cp <= 0x06ED);
}

}  // namespace

std::u32string prepare(std::string_view text) {
  std::u32string padded = U" ";
  for (char32_t cp : text::decode(ingest::normalize_sentence(text))) {
    if (is_optional_mark(cp)) continue;
    padded += cp == 0x0671 ? char32_t{0x0627} : cp;  // alef wasla
  }
  while (padded.size() > 1 && padded.back() == U' ') padded.pop_back();
  padded += U' ';
  return padded;
}

LangProfile train_profile(std::span<const std::string> corpus, const std::string& lang) {
  if (lang.empty() || lang == kUndetermined) fail(ErrorKind::training, "invalid language code");
  std::size_t chars = 0;
  std::unordered_map<std::string, std::uint32_t> counts;
  for (const auto& doc : corpus) {
    const auto padded = prepare(doc);
    if (padded.size() <= 2) continue;
    chars += padded.size() - 2;
    for_each_ngram(padded, [&](const std::string& gram, int) { ++counts[gram]; });
  }
  if (chars < kMinTrainingChars)
    fail(ErrorKind::training, "corpus for '" + lang + "' has " + std::to_string(chars) +
                                  " characters, need at least " +
                                  std::to_string(kMinTrainingChars));
  return LangProfile(lang, std::move(counts));
}

void save_profile(const LangProfile& profile, const std::filesystem::path& path) {
  nlohmann::json counts = nlohmann::json::object();
  // Sorted keys keep the file byte-stable across runs.
  std::vector<std::pair<std::string, std::uint32_t>> sorted;
  sorted.reserve(profile.ngrams().size());
  for (const auto& [gram, g] : profile.ngrams()) sorted.emplace_back(gram, g.count);
  std::sort(sorted.begin(), sorted.end());
  for (auto& [gram, count] : sorted) counts[gram] = count;
  nlohmann::json doc = {{"format", kFormat},
                        {"version", kVersion},
                        {"lang", profile.lang()},
                        {"n_range", {kMinOrder, kMaxOrder}},
                        {"counts", std::move(counts)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::environment, "cannot write profile " + path.string());
  out << doc.dump();
}

LangProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::configuration, "cannot read profile " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::integrity, "profile " + path.string() + " is not valid JSON: " + e.what());
  }
  if (doc.value("format", "") != kFormat || doc.value("version", 0) != kVersion)
    fail(ErrorKind::integrity, "profile " + path.string() + " has an unsupported format");
  const auto range = doc.at("n_range");
  if (range.at(0).get<int>() != kMinOrder || range.at(1).get<int>() != kMaxOrder)
    fail(ErrorKind::integrity, "profile " + path.string() + " has an unsupported n-gram range");
  std::unordered_map<std::string, std::uint32_t> counts;
  counts.reserve(doc.at("counts").size());
  for (const auto& [gram, count] : doc.at("counts").items()) counts.emplace(gram, count.get<std::uint32_t>());
  return LangProfile(doc.at("lang").get<std::string>(), std::move(counts));
}

namespace {

Detection score(std::string_view text, std::span<const LangProfile* const> profiles,
                const JointVocabulary& vocab, double margin_threshold) {
  const auto padded = prepare(text);
  const std::size_t chars = padded.size() - 2;
  if (chars == 0) fail(ErrorKind::input, "cannot detect the language of empty text");

  std::vector<double> sums(profiles.size(), 0.0);
  std::size_t grams = 0;
  for_each_ngram(padded, [&](const std::string& gram, int order) {
    ++grams;
    for (std::size_t p = 0; p < profiles.size(); ++p)
      sums[p] += profiles[p]->logprob(gram, order, vocab[order - 1]);
  });

  Detection d;
  d.ranking.reserve(profiles.size());
  for (std::size_t p = 0; p < profiles.size(); ++p)
    d.ranking.emplace_back(profiles[p]->lang(), sums[p] / static_cast<double>(grams));
  std::stable_sort(d.ranking.begin(), d.ranking.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  d.score = d.ranking[0].second;
  d.margin = d.ranking[0].second - d.ranking[1].second;
  d.lang = chars < kMinConfidentChars ? std::string(kUndetermined) : d.ranking[0].first;
  d.confident = d.lang != kUndetermined && d.margin >= margin_threshold;
  return d;
}

}  // namespace

Detection detect(std::string_view text, std::span<const LangProfile* const> profiles,
                 double margin_threshold) {
  if (profiles.size() < 2) fail(ErrorKind::input, "detection needs at least two profiles");
  return score(text, profiles, joint_vocabulary(profiles), margin_threshold);
}

Detector::Detector(std::vector<std::shared_ptr<const LangProfile>> profiles, double margin_threshold)
    : owned_(std::move(profiles)), margin_(margin_threshold) {
  for (const auto& p : owned_) {
    if (!p) fail(ErrorKind::configuration, "null language profile");
    if (has(p->lang())) fail(ErrorKind::configuration, "duplicate profile for '" + p->lang() + "'");
    raw_.push_back(p.get());
  }
  if (!(margin_threshold >= 0.0)) fail(ErrorKind::configuration, "margin threshold must be >= 0");
  vocab_ = joint_vocabulary(raw_);
}

Detection Detector::detect(std::string_view text) const {
  if (raw_.size() < 2) fail(ErrorKind::input, "detection needs at least two profiles");
  return score(text, raw_, vocab_, margin_);
}

bool Detector::has(std::string_view lang) const {
  return std::any_of(raw_.begin(), raw_.end(), [&](const LangProfile* p) { return p->lang() == lang; });
}

std::vector<std::string> Detector::languages() const {
  std::vector<std::string> out;
  for (const auto* p : raw_) out.push_back(p->lang());
  return out;
}

EvaluationReport evaluate(const Detector& detector,
                          std::span<const std::pair<std::string, std::string>> labeled) {
  if (labeled.empty()) fail(ErrorKind::input, "evaluation set is empty");
  for (const auto& [text, lang] : labeled)
    if (!detector.has(lang)) fail(ErrorKind::input, "no profile for label '" + lang + "'");

  EvaluationReport report;
  std::size_t confident = 0, correct = 0;
  for (const auto& [text, lang] : labeled) {
    auto& stats = report.per_language[lang];
    ++stats.total;
    const auto d = detector.detect(text);
    if (!d.confident) continue;
    ++stats.confident;
    ++confident;
    ++report.confusion[{lang, d.lang}];
    if (d.lang == lang) {
      ++stats.correct;
      ++correct;
    }
  }
  for (auto& [lang, stats] : report.per_language) {
    if (stats.confident) stats.accuracy = static_cast<double>(stats.correct) / stats.confident;
    stats.abstention = 1.0 - static_cast<double>(stats.confident) / stats.total;
  }
  report.total = labeled.size();
  if (confident) report.accuracy = static_cast<double>(correct) / confident;
  report.abstention_rate = 1.0 - static_cast<double>(confident) / labeled.size();
  return report;
}

}  // namespace corpusforge::langid
