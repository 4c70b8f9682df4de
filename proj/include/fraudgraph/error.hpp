#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fraudgraph {

// Error with a stable machine-parsable code ("ParseError", "ShapeMismatch", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
  throw Error(std::move(code), message);
}

}  // namespace fraudgraph
