#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/rational.hpp>
#include <json.hpp>

#include "corpusforge/types.hpp"

namespace corpusforge::exam {

inline constexpr std::size_t kItems = 10;
inline constexpr std::size_t kCorrect = 5;
inline constexpr std::size_t kMismatch = 2;
inline constexpr std::size_t kWrongLanguage = 1;
inline constexpr std::size_t kWordForWord = 2;
inline constexpr int kDefaultPassThreshold = 8;

enum class Label { correct, incorrect };
enum class DistractorKind { mismatch, wrong_language, word_for_word };

std::string_view to_string(Label l);
std::string_view to_string(DistractorKind k);
Label parse_label(std::string_view s);

struct ExamItem {
  std::string src;
  std::string tgt;
  Label true_label = Label::correct;
  std::optional<DistractorKind> distractor;  // present iff true_label is incorrect
};

struct ExamForm {
  Direction direction;
  std::string version;
  std::vector<ExamItem> items;
};

struct Composition {
  std::size_t correct = 0, mismatch = 0, wrong_language = 0, word_for_word = 0;
  bool operator==(const Composition&) const = default;
};
Composition composition(const ExamForm& form);

// Keeps the first sense listed for each source word.
class Glossary {
 public:
  void add(std::string word, std::string translation);
  const std::string* lookup(std::string_view word) const;
  bool empty() const { return senses_.empty(); }
  std::size_t size() const { return senses_.size(); }

 private:
  std::unordered_map<std::string, std::string> senses_;
};

struct ExamPools {
  std::vector<std::pair<std::string, std::string>> parallel;
  Glossary glossary;
  std::vector<std::string> other_lang;
};

// Reads correct.tsv, glossary.tsv and otherlang.txt from a directory.
ExamPools load_pools(const std::filesystem::path& dir);

// Naive token-by-token dictionary rendering; unknown tokens pass through.
std::string word_for_word(std::string_view src, const Glossary& glossary);

ExamForm build_exam(const Direction& direction, const ExamPools& pools, std::uint64_t seed);

// Number of answers matching the true labels.
int score_answers(const ExamForm& form, std::span<const Label> answers);

// Chance that uniformly random answers reach the threshold, exactly.
boost::rational<std::int64_t> guess_pass_probability(int pass_threshold);

struct ExamResult {
  WorkerId worker;
  Direction direction;
  std::string form_version;
  int score = 0;
  bool passed = false;
  Timestamp taken_at = 0;
};

void to_json(nlohmann::json& j, const ExamItem& item);
void from_json(const nlohmann::json& j, ExamItem& item);
void to_json(nlohmann::json& j, const ExamForm& form);
void from_json(const nlohmann::json& j, ExamForm& form);
void to_json(nlohmann::json& j, const ExamResult& r);
void from_json(const nlohmann::json& j, ExamResult& r);

}  // namespace corpusforge::exam
