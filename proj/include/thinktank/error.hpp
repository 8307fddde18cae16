#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace thinktank {

enum class ErrorKind {
  validation,
  not_found,
  conflict,
  state,
  gateway,
  timeout,
  config,
  protocol,
  integrity,
};

std::string_view to_string(ErrorKind kind);

/// Every failure surfaced by the engine carries a kind so the service can pick
/// an HTTP status and the CLI an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::vector<std::string> details = {})
      : std::runtime_error(message), kind_(kind), details_(std::move(details)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorKind kind_;
  std::vector<std::string> details_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace thinktank
