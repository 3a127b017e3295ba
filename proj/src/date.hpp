#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace buzz {

enum class DateFormat { iso, day_first, month_first };

// Calendar date stored as days since 1970-01-01. Construction validates the
// calendar triple, so every live Date is a real day.
class Date {
public:
  Date() : serial_(0) {}

  static Date from_ymd(int year, int month, int day);
  static Date from_serial(std::int32_t serial);

  // Throws Errc::bad_date on malformed or impossible input. Two digit years
  // are widened to 19xx/20xx with a pivot at 70.
  static Date parse(std::string_view text, DateFormat fmt);
  static std::optional<Date> try_parse(std::string_view text, DateFormat fmt);

  int year() const;
  int month() const;
  int day() const;
  std::int32_t serial() const { return serial_; }

  std::string iso() const;

  Date operator+(int days) const { return from_serial(serial_ + days); }
  Date operator-(int days) const { return from_serial(serial_ - days); }
  int operator-(Date other) const { return serial_ - other.serial_; }

  auto operator<=>(const Date&) const = default;

private:
  std::int32_t serial_;
};

// First and last day of the month containing d.
Date month_begin(Date d);
Date month_end(Date d);

}  // namespace buzz
