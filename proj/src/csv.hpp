#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace buzz {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by exact header name, nullopt when absent.
  std::optional<size_t> column(std::string_view name) const;
};

// RFC 4180 style reader: quoted fields, embedded delimiters and newlines,
// doubled quotes, CRLF line ends. Rows shorter than the header are padded
// with empty fields; longer rows and unterminated quotes raise Errc::parse
// with the offending 1-based row number.
CsvTable read_csv(std::istream& in, char delimiter = ',');
CsvTable read_csv_file(const std::string& path, char delimiter = ',');

std::string csv_escape(std::string_view field, char delimiter = ',');
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields,
                   char delimiter = ',');
std::string write_csv_row(const std::vector<std::string>& fields, char delimiter = ',');

// Strict numeric field parsers: surrounding whitespace allowed, anything else
// unparsed makes the field missing.
std::optional<double> parse_double_field(std::string_view s);
std::optional<long long> parse_int_field(std::string_view s);

// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);

}  // namespace buzz
