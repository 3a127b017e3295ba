#include "date.hpp"

#include <charconv>
#include <chrono>

#include "errors.hpp"

namespace buzz {

namespace {

namespace chr = std::chrono;

chr::year_month_day to_ymd(std::int32_t serial) {
  return chr::year_month_day(chr::sys_days(chr::days(serial)));
}

std::optional<int> parse_int_field(std::string_view s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

int widen_year(int y) {
  if (y >= 100) return y;
  return y >= 70 ? 1900 + y : 2000 + y;
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
  chr::year_month_day ymd{chr::year(year), chr::month(unsigned(month)), chr::day(unsigned(day))};
  if (!ymd.ok()) {
    raise(Errc::bad_date, "impossible calendar date " + std::to_string(year) + "-" +
                              std::to_string(month) + "-" + std::to_string(day));
  }
  return from_serial(int32_t(chr::sys_days(ymd).time_since_epoch().count()));
}

Date Date::from_serial(std::int32_t serial) {
  Date d;
  d.serial_ = serial;
  return d;
}

std::optional<Date> Date::try_parse(std::string_view text, DateFormat fmt) {
  // Accepted separators: '-' for iso, '/' or '-' or '.' otherwise.
  size_t a = text.find_first_of("-/.");
  if (a == std::string_view::npos) return std::nullopt;
  size_t b = text.find_first_of("-/.", a + 1);
  if (b == std::string_view::npos) return std::nullopt;
  auto f1 = parse_int_field(text.substr(0, a));
  auto f2 = parse_int_field(text.substr(a + 1, b - a - 1));
  auto f3 = parse_int_field(text.substr(b + 1));
  if (!f1 || !f2 || !f3) return std::nullopt;

  int y, m, d;
  switch (fmt) {
    case DateFormat::iso:
      y = *f1;
      m = *f2;
      d = *f3;
      break;
    case DateFormat::day_first:
      d = *f1;
      m = *f2;
      y = widen_year(*f3);
      break;
    case DateFormat::month_first:
      m = *f1;
      d = *f2;
      y = widen_year(*f3);
      break;
    default:
      return std::nullopt;
  }
  chr::year_month_day ymd{chr::year(y), chr::month(unsigned(m)), chr::day(unsigned(d))};
  if (!ymd.ok()) return std::nullopt;
  return from_serial(int32_t(chr::sys_days(ymd).time_since_epoch().count()));
}

Date Date::parse(std::string_view text, DateFormat fmt) {
  auto d = try_parse(text, fmt);
  if (!d) raise(Errc::bad_date, "cannot parse date field '" + std::string(text) + "'");
  return *d;
}

int Date::year() const { return int(to_ymd(serial_).year()); }
int Date::month() const { return int(unsigned(to_ymd(serial_).month())); }
int Date::day() const { return int(unsigned(to_ymd(serial_).day())); }

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year(), month(), day());
  return buf;
}

Date month_begin(Date d) { return Date::from_ymd(d.year(), d.month(), 1); }

Date month_end(Date d) {
  auto ymd = to_ymd(d.serial());
  auto last = chr::year_month_day_last(ymd.year(), chr::month_day_last(ymd.month()));
  return Date::from_serial(int32_t(chr::sys_days(last).time_since_epoch().count()));
}

}  // namespace buzz
