#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace corpusforge::langid {

inline constexpr int kMinOrder = 1;
inline constexpr int kMaxOrder = 5;
inline constexpr std::size_t kMinTrainingChars = 10'000;
inline constexpr std::size_t kMinConfidentChars = 20;
inline constexpr double kDefaultMargin = 0.05;
inline constexpr std::string_view kUndetermined = "und";

using JointVocabulary = std::array<std::uint64_t, kMaxOrder>;

// Multinomial character n-gram model for one language, n = 1..5, with
// add-one smoothing per order. Immutable once built.
class LangProfile {
 public:
  struct Gram {
    std::uint32_t count = 0;
    double logprob = 0.0;
  };

  LangProfile(std::string lang, std::unordered_map<std::string, std::uint32_t> counts);

  const std::string& lang() const { return lang_; }
  std::uint64_t total_ngrams() const { return total_; }
  std::size_t vocabulary() const { return grams_.size(); }
  std::uint64_t order_total(int order) const { return order_total_[order - 1]; }

  // Smoothed log-probability of an n-gram of the given order; unseen
  // n-grams receive the add-one mass of their order.
  double logprob(const std::string& gram, int order) const;
  // Same estimate with the smoothing spread over a vocabulary shared by
  // several profiles, which keeps small and large profiles comparable.
  double logprob(const std::string& gram, int order, std::uint64_t vocabulary) const;
  std::optional<Gram> find(const std::string& gram) const;

  const std::unordered_map<std::string, Gram>& ngrams() const { return grams_; }

 private:
  std::string lang_;
  std::unordered_map<std::string, Gram> grams_;
  std::array<std::uint64_t, kMaxOrder> order_total_{};
  std::array<std::uint64_t, kMaxOrder> order_vocab_{};
  std::array<double, kMaxOrder> unseen_{};
  std::uint64_t total_ = 0;
};

// Per-order size of the union of the profiles' n-gram vocabularies.
JointVocabulary joint_vocabulary(std::span<const LangProfile* const> profiles);

LangProfile train_profile(std::span<const std::string> corpus, const std::string& lang);

// Versioned JSON: {"format","version","lang","n_range":[1,5],"counts":{...}}.
void save_profile(const LangProfile& profile, const std::filesystem::path& path);
LangProfile load_profile(const std::filesystem::path& path);

// Normalized text padded with one space on each side, as code points.
std::u32string prepare(std::string_view text);
// Every n-gram of orders 1..5 over prepared text, encoded as UTF-8.
template <class F>
void for_each_ngram(std::u32string_view padded, F&& f);

struct Detection {
  std::string lang{kUndetermined};
  double score = 0.0;   // mean log-probability per n-gram under the best profile
  double margin = 0.0;  // best minus runner-up
  bool confident = false;
  std::vector<std::pair<std::string, double>> ranking;  // best first
};

Detection detect(std::string_view text, std::span<const LangProfile* const> profiles,
                 double margin_threshold = kDefaultMargin);

// Shared, immutable profile set with a fixed margin threshold.
class Detector {
 public:
  Detector(std::vector<std::shared_ptr<const LangProfile>> profiles, double margin_threshold);

  Detection detect(std::string_view text) const;
  bool has(std::string_view lang) const;
  std::vector<std::string> languages() const;
  double margin_threshold() const { return margin_; }
  std::span<const LangProfile* const> profiles() const { return raw_; }

 private:
  std::vector<std::shared_ptr<const LangProfile>> owned_;
  std::vector<const LangProfile*> raw_;
  double margin_;
  JointVocabulary vocab_{};
};

struct LanguageStats {
  std::size_t total = 0;
  std::size_t confident = 0;
  std::size_t correct = 0;
  std::optional<double> accuracy;  // correct / confident
  double abstention = 0.0;         // 1 - confident / total
};

struct EvaluationReport {
  std::map<std::string, LanguageStats> per_language;
  // (true language, predicted language) -> count, confident detections only
  std::map<std::pair<std::string, std::string>, std::size_t> confusion;
  std::optional<double> accuracy;
  double abstention_rate = 0.0;
  std::size_t total = 0;
};

EvaluationReport evaluate(const Detector& detector,
                          std::span<const std::pair<std::string, std::string>> labeled);

// ---------------------------------------------------------------------------

template <class F>
void for_each_ngram(std::u32string_view padded, F&& f) {
  std::string gram;
  for (std::size_t i = 0; i < padded.size(); ++i) {
    gram.clear();
    for (int n = 1; n <= kMaxOrder && i + n <= padded.size(); ++n) {
      const char32_t cp = padded[i + n - 1];
      if (cp < 0x80) {
        gram.push_back(static_cast<char>(cp));
      } else if (cp < 0x800) {
        gram.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        gram.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else if (cp < 0x10000) {
        gram.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        gram.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        gram.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else {
        gram.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        gram.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        gram.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        gram.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      }
      f(static_cast<const std::string&>(gram), n);
    }
  }
}

}  // namespace corpusforge::langid
