#include "csv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "errors.hpp"

namespace buzz {

std::optional<size_t> CsvTable::column(std::string_view name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

CsvTable read_csv(std::istream& in, char delimiter) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool record_has_data = false;
  long row_number = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    if (table.header.empty()) {
      table.header = std::move(record);
    } else {
      if (record.size() > table.header.size())
        raise(Errc::parse, "row " + std::to_string(row_number) + " has " +
                               std::to_string(record.size()) + " fields, header has " +
                               std::to_string(table.header.size()));
      record.resize(table.header.size());
      table.rows.push_back(std::move(record));
    }
    record.clear();
    record_has_data = false;
    ++row_number;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      in_quotes = true;
      record_has_data = true;
    } else if (c == delimiter) {
      end_field();
      record_has_data = true;
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      if (record_has_data || !field.empty() || !record.empty()) end_record();
    } else {
      field.push_back(c);
      record_has_data = true;
    }
  }
  if (in_quotes)
    raise(Errc::parse, "unterminated quoted field at row " + std::to_string(row_number));
  if (record_has_data || !field.empty() || !record.empty()) end_record();
  return table;
}

CsvTable read_csv_file(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot open " + path);
  return read_csv(in, delimiter);
}

std::string csv_escape(std::string_view field, char delimiter) {
  bool needs_quotes = false;
  for (char c : field)
    if (c == delimiter || c == '"' || c == '\n' || c == '\r') {
      needs_quotes = true;
      break;
    }
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out.put(delimiter);
    out << csv_escape(fields[i], delimiter);
  }
  out.put('\n');
}

std::string write_csv_row(const std::vector<std::string>& fields, char delimiter) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(delimiter);
    out += csv_escape(fields[i], delimiter);
  }
  out.push_back('\n');
  return out;
}

std::optional<double> parse_double_field(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(buf.c_str(), &end);
  if (errno == ERANGE || end != buf.c_str() + buf.size()) return std::nullopt;
  return v;
}

std::optional<long long> parse_int_field(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(buf.c_str(), &end, 10);
  if (errno == ERANGE || end == buf.c_str()) return std::nullopt;
  // Tolerate a ".0" style decimal tail as long as it is exactly zero.
  if (*end != '\0') {
    std::string_view tail(end);
    if (tail.size() < 2 || tail[0] != '.') return std::nullopt;
    for (char c : tail.substr(1))
      if (c != '0') return std::nullopt;
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

}  // namespace buzz
