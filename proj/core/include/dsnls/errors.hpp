#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dsnls {

/// A computation that should never fail for valid inputs did fail.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trajectory produced a non-finite value.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(std::int64_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}

  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, std::string key, const std::string& what)
      : std::runtime_error(what), line_(line), key_(std::move(key)) {}

  /// 1-based line number, 0 when the error is not tied to a line.
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

}  // namespace dsnls
