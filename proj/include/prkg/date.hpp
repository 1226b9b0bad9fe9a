#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace prkg {

/// A calendar date known to year, month or day precision: `YYYY`, `YYYY-MM`
/// or `YYYY-MM-DD`. A partial date stands for the whole range of days it
/// covers.
class PartialDate {
 public:
  static PartialDate parse(std::string_view text);
  static std::optional<PartialDate> try_parse(std::string_view text);

  static PartialDate year(int y);
  static PartialDate year_month(int y, unsigned m);
  static PartialDate year_month_day(int y, unsigned m, unsigned d);

  /// Today's date in UTC, day precision.
  static PartialDate today();

  int year_value() const { return year_; }
  std::optional<unsigned> month() const { return month_; }
  std::optional<unsigned> day() const { return day_; }

  std::chrono::sys_days first_day() const;
  std::chrono::sys_days last_day() const;

  std::string to_string() const;

  friend bool operator==(const PartialDate&, const PartialDate&) = default;
  friend auto operator<=>(const PartialDate&, const PartialDate&) = default;

 private:
  PartialDate(int y, std::optional<unsigned> m, std::optional<unsigned> d)
      : year_(y), month_(m), day_(d) {}

  int year_ = 0;
  std::optional<unsigned> month_;
  std::optional<unsigned> day_;
};

/// Validity of a relationship. An absent start means valid since forever; an
/// absent end means still valid.
struct TemporalInterval {
  std::optional<PartialDate> start;
  std::optional<PartialDate> end;

  static TemporalInterval unbounded() { return {}; }

  /// Throws invalid_argument when start covers days strictly after end.
  static TemporalInterval make(std::optional<PartialDate> start,
                               std::optional<PartialDate> end);

  bool well_formed() const;

  friend bool operator==(const TemporalInterval&, const TemporalInterval&) = default;
  friend auto operator<=>(const TemporalInterval&, const TemporalInterval&) = default;
};

bool is_valid_at(const TemporalInterval& interval, const PartialDate& at);

std::string to_string(const TemporalInterval& interval);

}  // namespace prkg
