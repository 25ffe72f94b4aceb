#pragma once

#include <optional>
#include <string>
#include <vector>

#include "argo/date.hpp"

namespace argo {

enum class GeoLevel { State, Region, Nation };

/// A geographic unit. For a state, `neighbors` is the set of states sharing
/// its region (the target state included), ordered lexicographically.
struct GeoUnit {
    std::string id;
    GeoLevel level = GeoLevel::State;
    std::optional<std::string> region_of;  // states only
    std::vector<std::string> neighbors;    // states only

    static GeoUnit nation(std::string id = "US") {
        return GeoUnit{std::move(id), GeoLevel::Nation, std::nullopt, {}};
    }
    static GeoUnit region(std::string id) {
        return GeoUnit{std::move(id), GeoLevel::Region, std::nullopt, {}};
    }
    static GeoUnit state(std::string id, std::string region,
                         std::vector<std::string> neighbors = {}) {
        return GeoUnit{std::move(id), GeoLevel::State, std::move(region),
                       std::move(neighbors)};
    }

    void validate() const;
};

enum class SignalKind { Cases, Deaths, Ili, SearchTerm };

struct Signal {
    SignalKind kind = SignalKind::Cases;
    std::string term;  // nonempty only for SearchTerm

    static Signal cases() { return {SignalKind::Cases, {}}; }
    static Signal deaths() { return {SignalKind::Deaths, {}}; }
    static Signal ili() { return {SignalKind::Ili, {}}; }
    static Signal search(std::string t) { return {SignalKind::SearchTerm, std::move(t)}; }

    bool operator==(const Signal&) const = default;
    std::string name() const;
};

/// Contiguous daily series. values[i] belongs to start.plus_days(i).
class DailySeries {
public:
    DailySeries() = default;
    DailySeries(GeoUnit geo, Signal signal, Date start, std::vector<double> values);

    const GeoUnit& geo() const { return geo_; }
    const Signal& signal() const { return signal_; }
    Date start() const { return start_; }
    Date end() const { return start_.plus_days(static_cast<long>(values_.size()) - 1); }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    Date date(std::size_t i) const { return start_.plus_days(static_cast<long>(i)); }

    bool covers(Date d) const { return d >= start_ && d <= end(); }
    double at(Date d) const;

    /// Truncated copy covering only dates <= cutoff. Errors if nothing remains.
    DailySeries truncated(Date cutoff) const;

private:
    GeoUnit geo_;
    Signal signal_;
    Date start_;
    std::vector<double> values_;
};

/// Weekly series on Saturday week endings, 7 days apart.
class WeeklySeries {
public:
    WeeklySeries() = default;
    WeeklySeries(GeoUnit geo, Signal signal, Date first_saturday,
                 std::vector<double> values);

    const GeoUnit& geo() const { return geo_; }
    const Signal& signal() const { return signal_; }
    Date first_week() const { return first_saturday_; }
    Date last_week() const { return week(values_.size() - 1); }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    Date week(std::size_t i) const {
        return first_saturday_.plus_weeks(static_cast<long>(i));
    }

    bool covers(Date week_ending) const;
    double at(Date week_ending) const;
    std::optional<std::size_t> index_of(Date week_ending) const;

    WeeklySeries truncated(Date cutoff) const;

private:
    GeoUnit geo_;
    Signal signal_;
    Date first_saturday_;
    std::vector<double> values_;
};

/// Week-over-week differences, kept alongside the base series so that the
/// level can be reconstructed exactly.
struct Increment {
    WeeklySeries base;
    std::vector<double> deltas;  // deltas[i] = base[i+1] - base[i]

    /// Rebuild the level series from base[0] and the deltas.
    WeeklySeries reconstruct() const;
};

// -- panel operations -------------------------------------------------------

/// Sum daily values into Saturday-ending weeks. `anchor` must be a Saturday;
/// it asserts the weekly grid and requires at least one complete week ending
/// on or after it. Partial leading/trailing weeks are dropped.
WeeklySeries aggregate_daily_to_weekly(const DailySeries& s, Date anchor);

/// output value at date d = input value at d - k periods.
DailySeries lag(const DailySeries& s, std::size_t k);
WeeklySeries lag(const WeeklySeries& s, std::size_t k);

Increment increment(const WeeklySeries& s);

/// Row-aligned join over the common date range of the inputs.
struct AlignedTable {
    std::vector<Date> dates;                    // ascending
    std::vector<std::vector<double>> columns;   // one per input series
};
AlignedTable align(const std::vector<const WeeklySeries*>& series);
AlignedTable align(const std::vector<const DailySeries*>& series);

/// Mixed-frequency join is a hard error; both frequencies in one call reject.
struct SeriesRef {
    const DailySeries* daily = nullptr;
    const WeeklySeries* weekly = nullptr;
    SeriesRef(const DailySeries& s) : daily(&s) {}
    SeriesRef(const WeeklySeries& s) : weekly(&s) {}
};
AlignedTable align(const std::vector<SeriesRef>& series);

}  // namespace argo
