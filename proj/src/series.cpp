#include "argo/series.hpp"

#include <algorithm>
#include <cmath>

namespace argo {

namespace {

void check_finite(const std::vector<double>& values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(std::string(what) + ": non-finite value");
    }
}

}  // namespace

void GeoUnit::validate() const {
    if (id.empty()) throw Error("GeoUnit: empty id");
    switch (level) {
        case GeoLevel::State:
            if (!region_of.has_value()) {
                throw Error("GeoUnit " + id + ": state must belong to a region");
            }
            break;
        case GeoLevel::Region:
        case GeoLevel::Nation:
            if (region_of.has_value()) {
                throw Error("GeoUnit " + id + ": only states carry region_of");
            }
            if (!neighbors.empty()) {
                throw Error("GeoUnit " + id + ": only states carry neighbors");
            }
            break;
    }
}

std::string Signal::name() const {
    switch (kind) {
        case SignalKind::Cases: return "cases";
        case SignalKind::Deaths: return "deaths";
        case SignalKind::Ili: return "ili";
        case SignalKind::SearchTerm: return "term:" + term;
    }
    return "?";
}

DailySeries::DailySeries(GeoUnit geo, Signal signal, Date start,
                         std::vector<double> values)
    : geo_(std::move(geo)), signal_(std::move(signal)), start_(start),
      values_(std::move(values)) {
    if (values_.empty()) throw Error("DailySeries: empty");
    check_finite(values_, "DailySeries");
}

double DailySeries::at(Date d) const {
    long off = start_.days_until(d);
    if (off < 0 || off >= static_cast<long>(values_.size())) {
        throw Error("DailySeries " + geo_.id + "/" + signal_.name() + ": date " +
                    d.to_string() + " out of range");
    }
    return values_[static_cast<std::size_t>(off)];
}

DailySeries DailySeries::truncated(Date cutoff) const {
    long n = start_.days_until(cutoff) + 1;
    if (n <= 0) {
        throw Error("DailySeries " + geo_.id + ": nothing on or before " +
                    cutoff.to_string());
    }
    n = std::min<long>(n, static_cast<long>(values_.size()));
    return DailySeries(geo_, signal_, start_,
                       std::vector<double>(values_.begin(), values_.begin() + n));
}

WeeklySeries::WeeklySeries(GeoUnit geo, Signal signal, Date first_saturday,
                           std::vector<double> values)
    : geo_(std::move(geo)), signal_(std::move(signal)),
      first_saturday_(first_saturday), values_(std::move(values)) {
    if (values_.empty()) throw Error("WeeklySeries: empty");
    if (!first_saturday_.is_saturday()) {
        throw Error("WeeklySeries " + geo_.id + ": week ending " +
                    first_saturday_.to_string() + " is not a Saturday");
    }
    check_finite(values_, "WeeklySeries");
}

bool WeeklySeries::covers(Date week_ending) const {
    return index_of(week_ending).has_value();
}

std::optional<std::size_t> WeeklySeries::index_of(Date week_ending) const {
    long d = first_saturday_.days_until(week_ending);
    if (d < 0 || d % 7 != 0) return std::nullopt;
    std::size_t i = static_cast<std::size_t>(d / 7);
    if (i >= values_.size()) return std::nullopt;
    return i;
}

double WeeklySeries::at(Date week_ending) const {
    auto i = index_of(week_ending);
    if (!i) {
        throw Error("WeeklySeries " + geo_.id + "/" + signal_.name() + ": week " +
                    week_ending.to_string() + " out of range");
    }
    return values_[*i];
}

WeeklySeries WeeklySeries::truncated(Date cutoff) const {
    long n = first_saturday_.days_until(cutoff) / 7 + 1;
    if (cutoff < first_saturday_) n = 0;
    if (n <= 0) {
        throw Error("WeeklySeries " + geo_.id + ": nothing on or before " +
                    cutoff.to_string());
    }
    n = std::min<long>(n, static_cast<long>(values_.size()));
    return WeeklySeries(geo_, signal_, first_saturday_,
                        std::vector<double>(values_.begin(), values_.begin() + n));
}

WeeklySeries Increment::reconstruct() const {
    std::vector<double> out(base.size());
    out[0] = base[0];
    for (std::size_t i = 0; i < deltas.size(); ++i) out[i + 1] = out[i] + deltas[i];
    return WeeklySeries(base.geo(), base.signal(), base.first_week(), std::move(out));
}

WeeklySeries aggregate_daily_to_weekly(const DailySeries& s, Date anchor) {
    if (!anchor.is_saturday()) {
        throw Error("aggregate_daily_to_weekly: anchor " + anchor.to_string() +
                    " is not a Saturday");
    }
    // First Saturday with a complete week inside the series.
    Date first_sat = s.start().plus_days(6).next_saturday_on_or_after();
    Date last = s.end();
    std::vector<double> sums;
    Date sat = first_sat;
    for (; sat <= last; sat = sat.plus_weeks(1)) {
        double acc = 0.0;
        for (int i = 0; i < 7; ++i) acc += s.at(sat.plus_days(-i));
        sums.push_back(acc);
    }
    if (sums.empty() || sat.plus_weeks(-1) < anchor) {
        throw Error("aggregate_daily_to_weekly: no complete week ending on or after " +
                    anchor.to_string());
    }
    return WeeklySeries(s.geo(), s.signal(), first_sat, std::move(sums));
}

DailySeries lag(const DailySeries& s, std::size_t k) {
    if (k >= s.size()) {
        throw Error("lag: k=" + std::to_string(k) + " >= length " +
                    std::to_string(s.size()));
    }
    std::vector<double> v(s.values().begin(), s.values().end() - static_cast<long>(k));
    return DailySeries(s.geo(), s.signal(), s.start().plus_days(static_cast<long>(k)),
                       std::move(v));
}

WeeklySeries lag(const WeeklySeries& s, std::size_t k) {
    if (k >= s.size()) {
        throw Error("lag: k=" + std::to_string(k) + " >= length " +
                    std::to_string(s.size()));
    }
    std::vector<double> v(s.values().begin(), s.values().end() - static_cast<long>(k));
    return WeeklySeries(s.geo(), s.signal(), s.first_week().plus_weeks(static_cast<long>(k)),
                        std::move(v));
}

Increment increment(const WeeklySeries& s) {
    if (s.size() < 2) throw Error("increment: need at least 2 weeks");
    std::vector<double> d(s.size() - 1);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) d[i] = s[i + 1] - s[i];
    return Increment{s, std::move(d)};
}

namespace {

Date first_date(const WeeklySeries& s) { return s.first_week(); }
Date last_date(const WeeklySeries& s) { return s.last_week(); }
Date first_date(const DailySeries& s) { return s.start(); }
Date last_date(const DailySeries& s) { return s.end(); }

template <typename Series>
AlignedTable align_impl(const std::vector<const Series*>& series, long step_days) {
    if (series.empty()) throw Error("align: no series");
    Date lo = first_date(*series[0]);
    Date hi = last_date(*series[0]);
    for (const Series* s : series) {
        lo = std::max(lo, first_date(*s));
        hi = std::min(hi, last_date(*s));
    }
    if (hi < lo) throw Error("align: empty date intersection");
    AlignedTable t;
    for (Date d = lo; d <= hi; d = d.plus_days(step_days)) t.dates.push_back(d);
    t.columns.resize(series.size());
    for (std::size_t c = 0; c < series.size(); ++c) {
        t.columns[c].reserve(t.dates.size());
        for (Date d : t.dates) t.columns[c].push_back(series[c]->at(d));
    }
    return t;
}

}  // namespace

AlignedTable align(const std::vector<const WeeklySeries*>& series) {
    // Weekly grids must agree mod 7 (all Saturdays, so they do).
    return align_impl(series, 7);
}

AlignedTable align(const std::vector<const DailySeries*>& series) {
    return align_impl(series, 1);
}

AlignedTable align(const std::vector<SeriesRef>& series) {
    if (series.empty()) throw Error("align: no series");
    bool any_daily = false, any_weekly = false;
    for (const SeriesRef& r : series) {
        any_daily |= r.daily != nullptr;
        any_weekly |= r.weekly != nullptr;
    }
    if (any_daily && any_weekly) {
        throw Error("align: cannot mix daily and weekly series");
    }
    if (any_daily) {
        std::vector<const DailySeries*> v;
        for (const SeriesRef& r : series) v.push_back(r.daily);
        return align(v);
    }
    std::vector<const WeeklySeries*> v;
    for (const SeriesRef& r : series) v.push_back(r.weekly);
    return align(v);
}

}  // namespace argo
