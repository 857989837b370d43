#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "neurosdt/error.hpp"

namespace neurosdt {

// A probability in [0, 1].
class Probability {
 public:
  constexpr Probability() = default;
  explicit Probability(double v) : value_(v) {
    detail::require(v >= 0.0 && v <= 1.0,
                    "probability out of [0, 1]: " + std::to_string(v));
  }
  constexpr double value() const { return value_; }
  constexpr operator double() const { return value_; }

 private:
  double value_ = 0.0;
};

// Standard normal CDF. erfc keeps full relative accuracy in both tails.
inline double norm_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// Upper tail 1 - Phi(z), without cancellation for large z.
inline double norm_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

inline double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Inverse standard normal CDF.
//
// Wichura's AS241 (PPND16, ~1e-16 relative) followed by one Newton step
// against norm_cdf. p must lie strictly inside (0, 1); rates of exactly 0 or
// 1 have to be corrected by the caller.
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InputError("norm_quantile: p must be in (0, 1), got " + std::to_string(p));
  }
  const double q = p - 0.5;
  double x;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q *
        (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
              67265.770927008700853) * r + 45921.953931549871457) * r +
            13731.693765509461125) * r + 1971.5909503065514427) * r +
          133.14166789178437745) * r + 3.387132872796366608) /
        (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
              39307.89580009271061) * r + 21213.794301586595867) * r +
            5394.1960214247511077) * r + 687.1870074920579083) * r +
          42.313330701600911252) * r + 1.0);
  } else {
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
      r -= 1.6;
      x = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
    } else {
      r -= 5.0;
      x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
    }
    if (q < 0.0) x = -x;
  }
  // Newton polish, residual taken on the tail that keeps precision.
  const double pdf = norm_pdf(x);
  if (pdf > 0.0) {
    const double resid = p < 0.5 ? norm_cdf(x) - p : (1.0 - p) - norm_sf(x);
    x -= resid / pdf;
  }
  return x;
}

// Two-sided p-value of a Student-t statistic with df degrees of freedom.
inline double student_t_two_sided(double t, double df) {
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

}  // namespace neurosdt
