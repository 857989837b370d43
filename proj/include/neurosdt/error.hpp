#pragma once

#include <stdexcept>
#include <string>

namespace neurosdt {

inline constexpr const char* kVersion = "0.3.1";

// Bad input data, bad files, or a violated precondition that traces back to
// user-supplied values. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A library invariant failed. The CLI maps this to exit code 2.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

inline void ensure(bool ok, const std::string& what) {
  if (!ok) throw InvariantError(what);
}

}  // namespace detail
}  // namespace neurosdt
