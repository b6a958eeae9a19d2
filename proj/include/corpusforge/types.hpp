#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace corpusforge {

// Milliseconds since the Unix epoch.
using Timestamp = std::int64_t;
using Clock = std::function<Timestamp()>;
Timestamp system_now();

template <class Tag>
struct Id {
  std::uint64_t value = 0;

  auto operator<=>(const Id&) const = default;
  explicit operator bool() const { return value != 0; }
};

template <class Tag>
void to_json(nlohmann::json& j, const Id<Tag>& id) { j = id.value; }
template <class Tag>
void from_json(const nlohmann::json& j, Id<Tag>& id) { id.value = j.get<std::uint64_t>(); }

using SourceId = Id<struct SourceTag>;
using TaskId = Id<struct TaskTag>;
using TranslationId = Id<struct TranslationTag>;
using AssignmentId = Id<struct AssignmentTag>;
using WorkerId = Id<struct WorkerTag>;

// Ordered source -> target language pair, written "che-rus".
struct Direction {
  std::string src;
  std::string tgt;

  std::string code() const { return src + "-" + tgt; }
  static Direction parse(std::string_view code);

  auto operator<=>(const Direction&) const = default;
};

void to_json(nlohmann::json& j, const Direction& d);
void from_json(const nlohmann::json& j, Direction& d);

// English display name for the instruction template; falls back to the code.
std::string language_name(std::string_view code);

enum class Verdict { good, bad };
enum class Decision { accepted, rejected };
enum class TaskKind { translate, verify };

std::string_view to_string(Verdict v);
std::string_view to_string(Decision d);
std::string_view to_string(TaskKind k);
Verdict parse_verdict(std::string_view s);
TaskKind parse_task_kind(std::string_view s);

}  // namespace corpusforge

template <class Tag>
struct std::hash<corpusforge::Id<Tag>> {
  std::size_t operator()(const corpusforge::Id<Tag>& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};
