#pragma once

#include <array>
#include <cmath>
#include <string>

#include "neurosdt/error.hpp"
#include "neurosdt/types.hpp"

namespace neurosdt {

// Five strictly increasing criteria c1 < ... < c5 splitting the (transformed)
// feature axis into six response regions. c3 is the category boundary.
class CriteriaSet {
 public:
  CriteriaSet() = default;
  explicit CriteriaSet(const std::array<double, 5>& c) : c_(c) {
    for (double v : c_) detail::require(std::isfinite(v), "criteria must be finite");
    for (std::size_t i = 1; i < c_.size(); ++i) {
      if (!(c_[i - 1] < c_[i])) {
        throw InputError("criteria must be strictly increasing (c" + std::to_string(i) +
                         " >= c" + std::to_string(i + 1) + ")");
      }
    }
  }

  const std::array<double, 5>& values() const { return c_; }
  double operator[](std::size_t i) const { return c_[i]; }
  double boundary() const { return c_[2]; }

  friend bool operator==(const CriteriaSet&, const CriteriaSet&) = default;

 private:
  std::array<double, 5> c_{-2.0, -1.0, 0.0, 1.0, 2.0};
};

struct ResponseCategory {
  Condition decision = Condition::Safe;
  Grade grade = Grade::Low;

  friend bool operator==(const ResponseCategory&, const ResponseCategory&) = default;
};

// Column order used by rating counts and the rating ROC:
// Hazard-High, Hazard-Med, Hazard-Low, Safe-Low, Safe-Med, Safe-High.
inline constexpr std::array<const char*, 6> kCategoryNames = {
    "hazard_high", "hazard_med", "hazard_low", "safe_low", "safe_med", "safe_high"};

constexpr std::size_t category_column(ResponseCategory r) {
  const auto g = static_cast<std::size_t>(r.grade);
  return r.decision == Condition::Hazard ? 2 - g : 3 + g;
}

constexpr ResponseCategory category_of_column(std::size_t col) {
  if (col < 3) return {Condition::Hazard, static_cast<Grade>(2 - col)};
  return {Condition::Safe, static_cast<Grade>(col - 3)};
}

// Regions are closed on the right: a point exactly on c_j belongs to the
// region below it, so x == c3 reads as Safe-Low.
inline ResponseCategory classify_rating(double x, const CriteriaSet& criteria) {
  std::size_t above = 0;
  for (double c : criteria.values()) {
    if (x > c) ++above;
  }
  return category_of_column(5 - above);
}

}  // namespace neurosdt
