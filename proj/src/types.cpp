#include "corpusforge/types.hpp"

#include <chrono>
#include <map>

#include "corpusforge/error.hpp"

namespace corpusforge {

Timestamp system_now() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

Direction Direction::parse(std::string_view code) {
  const auto dash = code.find('-');
  if (dash == std::string_view::npos || dash == 0 || dash + 1 >= code.size() ||
      code.find('-', dash + 1) != std::string_view::npos)
    fail(ErrorKind::input, "malformed direction '" + std::string(code) + "', expected src-tgt");
  Direction d{std::string(code.substr(0, dash)), std::string(code.substr(dash + 1))};
  if (d.src == d.tgt) fail(ErrorKind::input, "direction source and target must differ");
  return d;
}

void to_json(nlohmann::json& j, const Direction& d) { j = d.code(); }
void from_json(const nlohmann::json& j, Direction& d) { d = Direction::parse(j.get<std::string>()); }

std::string language_name(std::string_view code) {
  static const std::map<std::string, std::string, std::less<>> names = {
      {"ara", "Arabic"},  {"che", "Chechen"}, {"deu", "German"},
      {"eng", "English"}, {"fra", "French"},  {"fuv", "Fula"},
      {"ind", "Indonesian"}, {"nld", "Dutch"}, {"rus", "Russian"},
      {"spa", "Spanish"}, {"tur", "Turkish"},
  };
  if (auto it = names.find(code); it != names.end()) return it->second;
  return std::string(code);
}

std::string_view to_string(Verdict v) { return v == Verdict::good ? "good" : "bad"; }
std::string_view to_string(Decision d) { return d == Decision::accepted ? "accepted" : "rejected"; }
std::string_view to_string(TaskKind k) { return k == TaskKind::translate ? "translate" : "verify"; }

Verdict parse_verdict(std::string_view s) {
  if (s == "good") return Verdict::good;
  if (s == "bad") return Verdict::bad;
  fail(ErrorKind::input, "verdict must be 'good' or 'bad'");
}

TaskKind parse_task_kind(std::string_view s) {
  if (s == "translate") return TaskKind::translate;
  if (s == "verify") return TaskKind::verify;
  fail(ErrorKind::input, "kind must be 'translate' or 'verify'");
}

}  // namespace corpusforge
