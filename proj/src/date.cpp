#include "argo/date.hpp"

#include <cstdio>

namespace argo {

Date::Date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year(year), std::chrono::month(month),
                                    std::chrono::day(day)};
    if (!ymd.ok()) {
        throw Error("invalid calendar date " + std::to_string(year) + "-" +
                    std::to_string(month) + "-" + std::to_string(day));
    }
    days_ = std::chrono::sys_days(ymd);
}

Date Date::parse(std::string_view iso) {
    // Strict YYYY-MM-DD.
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw Error("bad date literal '" + std::string(iso) + "' (want YYYY-MM-DD)");
    }
    bool ok1 = false, ok2 = false, ok3 = false;
    long y = parse_long(iso.substr(0, 4), &ok1);
    long m = parse_long(iso.substr(5, 2), &ok2);
    long d = parse_long(iso.substr(8, 2), &ok3);
    if (!ok1 || !ok2 || !ok3) {
        throw Error("bad date literal '" + std::string(iso) + "' (want YYYY-MM-DD)");
    }
    return Date(static_cast<int>(y), static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string Date::to_string() const {
    std::chrono::year_month_day ymd(days_);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()));
    return buf;
}

unsigned Date::iso_weekday() const {
    std::chrono::weekday wd(days_);
    return wd.iso_encoding();
}

Date Date::next_saturday_on_or_after() const {
    Date d = *this;
    while (!d.is_saturday()) d = d.plus_days(1);
    return d;
}

}  // namespace argo
