// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsgd {

// Flat float64 parameter/gradient buffer; the unit of all collective traffic.
using ParamVector = std::vector<double>;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what) : Error(what) {}
};

template <typename... Args>
std::string str_cat(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

template <typename Err = Error, typename... Args>
void check(bool cond, const Args&... args) {
  if (!cond) throw Err(str_cat(args...));
}

inline void check_finite(const ParamVector& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(str_cat("non-finite value in ", what));
  }
}

}  // namespace lsgd
