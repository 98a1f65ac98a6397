#pragma once

#include <stdexcept>
#include <string>

namespace forge {

// Base for every error the library raises on bad input or infeasible requests.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed documents (JSON specs, CSV tables). Carries the offending
// line (1-based, 0 when unknown) and field name when one applies.
class ParseError : public DomainError {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::string field = {})
      : DomainError(decorate(what, line, field)), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string decorate(const std::string& what, std::size_t line, const std::string& field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + what;
  }

  std::size_t line_;
  std::string field_;
};

// A referenced file is missing or unreadable.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace forge
