#pragma once

#include <stdexcept>
#include <string>

namespace cooc {

// Exit-code families used by the CLI: usage = 1, data = 2, numerical = 3.

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input row. `row()` is the 1-based line number in the source.
class ParseError : public DataError {
public:
  ParseError(const std::string& source, std::size_t row, const std::string& what)
      : DataError(source + ": row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input too large for a quadratic-time oracle.
class RefusalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace cooc
