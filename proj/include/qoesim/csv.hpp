#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qoesim {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace csv {

/// Minimal reader for the comma separated formats used by this project
/// (no quoting, LF line endings, header row required).
class Reader {
 public:
  Reader(std::istream& in, std::string source_name);

  /// Checks the header row against `expected`. Throws ParseError otherwise.
  void expect_header(std::string_view expected);

  /// Reads the next non-empty row. Returns false at end of input.
  bool next(std::vector<std::string_view>& fields);

  std::size_t line() const { return line_; }
  const std::string& source() const { return source_; }

  double to_double(std::string_view field, std::string_view column) const;
  long long to_int(std::string_view field, std::string_view column) const;

 private:
  std::istream& in_;
  std::string source_;
  std::string buffer_;
  std::size_t line_ = 0;
};

/// Shortest round-trip text for a double; integral values print without
/// exponent and infinities as "inf".
std::string format_number(double value);

}  // namespace csv
}  // namespace qoesim
