#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace rabbitt {

/// Malformed or inconsistent user input (configuration, file formats).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical precondition does not hold (state below threshold, k == kappa, ...).
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed (rank deficiency, instability, lost flux).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline std::function<void(const std::string&)>& warning_sink() {
  static std::function<void(const std::string&)> sink = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return sink;
}
}  // namespace detail

/// Replace the warning handler; pass an empty function to silence warnings.
inline void set_warning_handler(std::function<void(const std::string&)> handler) {
  detail::warning_sink() = std::move(handler);
}

inline void warn(const std::string& msg) {
  if (auto& sink = detail::warning_sink()) sink(msg);
}

}  // namespace rabbitt
