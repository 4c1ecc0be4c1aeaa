// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace nrsim {

/// Malformed input document (bad syntax, unknown key, unparsable value).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structurally valid input that violates a scenario invariant.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Internal consistency fault while a simulation is running.
class SimError : public std::logic_error {
public:
  explicit SimError(const std::string& msg) : std::logic_error(msg) {}
};

inline void sim_check(bool cond, const std::string& msg) {
  if (!cond) {
    throw SimError(msg);
  }
}

}  // namespace nrsim
