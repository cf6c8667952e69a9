#pragma once

// Minimal RFC 4180 reader/writer: comma separated, double-quote escaping,
// LF or CRLF line ends.

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crr::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Throws Error{UnparseableRow}
  /// on an unterminated quoted field.
  std::optional<Record> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

/// Header lookup: index of `name`, or nullopt.
std::optional<std::size_t> column_index(const std::vector<std::string>& header, std::string_view name);

/// Quotes a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

bool is_blank(const Record& r);

}  // namespace crr::csv
