#pragma once

#include <stdexcept>
#include <string>

namespace dpsim {

/// Raised when a caller breaks a documented precondition or a type invariant.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when an input file cannot be parsed. `where` names the file and
/// position (line, key, or array index) of the first problem.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace dpsim
