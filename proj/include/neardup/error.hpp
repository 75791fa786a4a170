#pragma once

#include <stdexcept>
#include <string>

namespace neardup {

// Maps onto the CLI exit codes: usage/config = 1, data = 2, internal = 3.
enum class ErrorKind { config = 1, data = 2, internal = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& msg) {
  throw Error(ErrorKind::config, msg);
}

[[noreturn]] inline void throw_data(const std::string& msg) {
  throw Error(ErrorKind::data, msg);
}

[[noreturn]] inline void throw_internal(const std::string& msg) {
  throw Error(ErrorKind::internal, msg);
}

}  // namespace neardup
