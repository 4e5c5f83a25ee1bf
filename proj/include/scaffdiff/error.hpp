//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_ERROR_HPP_
#define SCAFFDIFF_ERROR_HPP_

#include <sstream>
#include <stdexcept>
#include <string>

namespace scaffdiff {

/// Runtime failure inside the library (maps to exit code 1 in the CLI).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

/// Bad user input: malformed files, unknown keys, out-of-range arguments
/// (maps to exit code 2 in the CLI).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string &what) : Error(what) {}
};

namespace detail {
template <class E, class... Args>
[[noreturn]] inline void raise(Args &&...args) {
  std::ostringstream os;
  (os << ... << args);
  throw E(os.str());
}
}  // namespace detail

#define SCAFFDIFF_CHECK(cond, ...)                                  \
  do {                                                              \
    if (!(cond))                                                    \
      ::scaffdiff::detail::raise<::scaffdiff::Error>(__VA_ARGS__);  \
  } while (0)

#define SCAFFDIFF_CHECK_CONFIG(cond, ...)                                \
  do {                                                                   \
    if (!(cond))                                                         \
      ::scaffdiff::detail::raise<::scaffdiff::ConfigError>(__VA_ARGS__); \
  } while (0)

}  // namespace scaffdiff

#endif  // SCAFFDIFF_ERROR_HPP_
