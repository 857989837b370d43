#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "neurosdt/error.hpp"

namespace neurosdt {

// Stimulus label / reported category. Hazard is C = +1, Safe is C = -1.
enum class Condition : int { Hazard = 1, Safe = -1 };

constexpr int sign(Condition c) { return static_cast<int>(c); }

enum class Grade : int { Low = 0, Medium = 1, High = 2 };

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

inline std::optional<Condition> parse_condition(std::string_view s) {
  const auto v = lower(s);
  if (v == "hazard" || v == "hazardous" || v == "1") return Condition::Hazard;
  if (v == "safe" || v == "-1") return Condition::Safe;
  return std::nullopt;
}

inline const char* to_string(Condition c) {
  return c == Condition::Hazard ? "hazard" : "safe";
}

// Returns nullopt for an unknown label; an empty field is "no rating" and is
// handled by the caller.
inline std::optional<Grade> parse_grade(std::string_view s) {
  const auto v = lower(s);
  if (v == "low") return Grade::Low;
  if (v == "med" || v == "medium") return Grade::Medium;
  if (v == "high") return Grade::High;
  return std::nullopt;
}

inline const char* to_string(Grade g) {
  switch (g) {
    case Grade::Low: return "low";
    case Grade::Medium: return "med";
    case Grade::High: return "high";
  }
  return "?";
}

}  // namespace neurosdt
