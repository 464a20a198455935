#include "qoesim/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>

namespace qoesim {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace csv {

namespace {

void split(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

Reader::Reader(std::istream& in, std::string source_name) : in_(in), source_(std::move(source_name)) {}

void Reader::expect_header(std::string_view expected) {
  if (!std::getline(in_, buffer_)) throw ParseError(source_, 1, "missing header");
  ++line_;
  std::string_view got = strip_cr(buffer_);
  if (got.size() >= 3 && got.substr(0, 3) == "\xEF\xBB\xBF") got.remove_prefix(3);
  if (got != expected) {
    throw ParseError(source_, line_, "unexpected header '" + std::string(got) + "', expected '" +
                                         std::string(expected) + "'");
  }
}

bool Reader::next(std::vector<std::string_view>& fields) {
  while (std::getline(in_, buffer_)) {
    ++line_;
    std::string_view row = strip_cr(buffer_);
    if (row.empty()) continue;
    split(row, fields);
    return true;
  }
  return false;
}

double Reader::to_double(std::string_view field, std::string_view column) const {
  double value = 0.0;
  if (field == "inf") return HUGE_VAL;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(source_, line_,
                     "malformed number '" + std::string(field) + "' in column " + std::string(column));
  }
  return value;
}

long long Reader::to_int(std::string_view field, std::string_view column) const {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(source_, line_,
                     "malformed integer '" + std::string(field) + "' in column " + std::string(column));
  }
  return value;
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  if (value == std::floor(value) && std::fabs(value) < 1e15) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(value));
    return std::string(buf, ptr);
  }
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace csv
}  // namespace qoesim
