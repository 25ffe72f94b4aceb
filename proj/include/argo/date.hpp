#pragma once

#include <chrono>
#include <compare>
#include <string>

#include "argo/util.hpp"

namespace argo {

/// Calendar date with day resolution. Weeks end on Saturdays throughout the
/// toolkit; anything else is rejected at the point of use.
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::sys_days d) : days_(d) {}
    Date(int year, unsigned month, unsigned day);

    static Date parse(std::string_view iso);  // "YYYY-MM-DD"
    std::string to_string() const;

    // Mon=1 .. Sun=7 (ISO numbering).
    unsigned iso_weekday() const;
    bool is_saturday() const { return iso_weekday() == 6; }
    bool is_sunday() const { return iso_weekday() == 7; }

    Date plus_days(long n) const { return Date(days_ + std::chrono::days(n)); }
    Date plus_weeks(long n) const { return plus_days(7 * n); }
    long days_until(Date other) const { return (other.days_ - days_).count(); }

    /// First Saturday on or after this date.
    Date next_saturday_on_or_after() const;

    long serial() const { return days_.time_since_epoch().count(); }

    auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

}  // namespace argo
