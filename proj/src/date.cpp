#include "prkg/date.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "prkg/error.hpp"

namespace prkg {

namespace {

std::optional<unsigned> digits(std::string_view text, std::size_t width) {
  if (text.size() != width) return std::nullopt;
  unsigned value = 0;
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    value = value * 10 + static_cast<unsigned>(c - '0');
  }
  return value;
}

bool valid_parts(int y, std::optional<unsigned> m, std::optional<unsigned> d) {
  if (y < 0 || y > 9999) return false;
  if (!m) return !d;
  if (*m < 1 || *m > 12) return false;
  if (!d) return true;
  using namespace std::chrono;
  return year_month_day{std::chrono::year{y}, std::chrono::month{*m}, std::chrono::day{*d}}.ok();
}

}  // namespace

std::optional<PartialDate> PartialDate::try_parse(std::string_view text) {
  auto y = digits(text.substr(0, 4), 4);
  if (!y) return std::nullopt;
  std::optional<unsigned> m;
  std::optional<unsigned> d;
  if (text.size() > 4) {
    if (text[4] != '-') return std::nullopt;
    m = digits(text.substr(5, 2), 2);
    if (!m) return std::nullopt;
    if (text.size() > 7) {
      if (text[7] != '-') return std::nullopt;
      d = digits(text.substr(8), 2);
      if (!d) return std::nullopt;
    }
  }
  if (!valid_parts(static_cast<int>(*y), m, d)) return std::nullopt;
  return PartialDate(static_cast<int>(*y), m, d);
}

PartialDate PartialDate::parse(std::string_view text) {
  auto parsed = try_parse(text);
  if (!parsed) {
    throw Error(Errc::invalid_argument,
                "malformed date '" + std::string(text) + "' (expected YYYY, YYYY-MM or YYYY-MM-DD)");
  }
  return *parsed;
}

PartialDate PartialDate::year(int y) {
  if (!valid_parts(y, std::nullopt, std::nullopt))
    throw Error(Errc::invalid_argument, "year out of range");
  return PartialDate(y, std::nullopt, std::nullopt);
}

PartialDate PartialDate::year_month(int y, unsigned m) {
  if (!valid_parts(y, m, std::nullopt))
    throw Error(Errc::invalid_argument, "invalid year-month");
  return PartialDate(y, m, std::nullopt);
}

PartialDate PartialDate::year_month_day(int y, unsigned m, unsigned d) {
  if (!valid_parts(y, m, d)) throw Error(Errc::invalid_argument, "invalid calendar date");
  return PartialDate(y, m, d);
}

PartialDate PartialDate::today() {
  using namespace std::chrono;
  std::chrono::year_month_day ymd{floor<days>(system_clock::now())};
  return PartialDate(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

std::chrono::sys_days PartialDate::first_day() const {
  using namespace std::chrono;
  return sys_days{std::chrono::year{year_} / std::chrono::month{month_.value_or(1)} /
                  std::chrono::day{day_.value_or(1)}};
}

std::chrono::sys_days PartialDate::last_day() const {
  using namespace std::chrono;
  if (day_) return first_day();
  auto m = std::chrono::month{month_.value_or(12)};
  return sys_days{std::chrono::year{year_} / m / last};
}

std::string PartialDate::to_string() const {
  char buf[16];
  if (day_) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year_, *month_, *day_);
  } else if (month_) {
    std::snprintf(buf, sizeof buf, "%04d-%02u", year_, *month_);
  } else {
    std::snprintf(buf, sizeof buf, "%04d", year_);
  }
  return buf;
}

bool TemporalInterval::well_formed() const {
  if (start && end) return start->first_day() <= end->last_day();
  return true;
}

TemporalInterval TemporalInterval::make(std::optional<PartialDate> start,
                                        std::optional<PartialDate> end) {
  TemporalInterval interval{start, end};
  if (!interval.well_formed()) {
    throw Error(Errc::invalid_argument,
                "interval start " + start->to_string() + " is after end " + end->to_string());
  }
  return interval;
}

bool is_valid_at(const TemporalInterval& interval, const PartialDate& at) {
  if (interval.start && interval.start->first_day() > at.last_day()) return false;
  if (interval.end && at.first_day() > interval.end->last_day()) return false;
  return true;
}

std::string to_string(const TemporalInterval& interval) {
  return "[" + (interval.start ? interval.start->to_string() : std::string("-")) + ", " +
         (interval.end ? interval.end->to_string() : std::string("-")) + "]";
}

}  // namespace prkg
