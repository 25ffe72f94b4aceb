#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "argo/config.hpp"
#include "argo/series.hpp"

namespace argo {

/// A search-trend panel entry; daily or Saturday-weekly, uniform per term.
struct TrendSeries {
    std::optional<DailySeries> daily;
    std::optional<WeeklySeries> weekly;

    bool is_daily() const { return daily.has_value(); }
};

struct LoadReport {
    std::size_t cases_rows = 0;
    std::size_t ili_rows = 0;
    std::size_t trends_rows = 0;
    std::size_t n_states = 0;
};

struct DatasetBundle {
    std::vector<GeoUnit> geography;  // states, then regions, then nation
    std::map<std::string, DailySeries> cases;   // keyed by geo id
    std::map<std::string, DailySeries> deaths;
    std::map<std::string, WeeklySeries> ili;
    std::map<std::pair<std::string, std::string>, TrendSeries> trends;  // (geo, term)

    const GeoUnit& geo(const std::string& id) const;
    bool has_geo(const std::string& id) const;
    std::vector<std::string> state_ids() const;
    std::vector<std::string> region_ids() const;
    std::string nation_id() const;
    /// States in the same region as `state_id`, the state included, sorted.
    std::vector<std::string> neighbors_of(const std::string& state_id) const;
    std::vector<std::string> term_names() const;

    void validate() const;
};

/// Loads and validates the CSV panel per the documented schemas.
DatasetBundle load_bundle(const RunConfig& cfg, LoadReport* report = nullptr);

/// Builds the geography list (neighbors included) from state -> region pairs.
std::vector<GeoUnit> build_geography(
    const std::vector<std::pair<std::string, std::string>>& state_regions,
    const std::string& nation_id = "US");

/// Built-in US postal -> HHS region assignment used when no geography file
/// is supplied and all geo codes are recognized.
const std::map<std::string, std::string>& us_hhs_regions();

// CSV emission of a bundle (inverse of load_bundle for state-level series).
void write_cases_csv(const DatasetBundle& b, const std::string& path);
void write_ili_csv(const DatasetBundle& b, const std::string& path);
void write_trends_csv(const DatasetBundle& b, const std::string& path);
void write_geography_csv(const DatasetBundle& b, const std::string& path);

// -- level accessors ---------------------------------------------------------
// Stored series win; otherwise states aggregate up: sums for counts and
// trends, the cross-state mean for %ILI.

DailySeries daily_at_level(const DatasetBundle& b, const std::string& geo_id,
                           SignalKind kind);
WeeklySeries ili_at_level(const DatasetBundle& b, const std::string& geo_id);
TrendSeries trend_at_level(const DatasetBundle& b, const std::string& geo_id,
                           const std::string& term);

/// Weekly truth for scoring: Saturday-aggregated cases/deaths, %ILI as is.
WeeklySeries truth_weekly(const DatasetBundle& b, const std::string& geo_id,
                          Target target);

/// Read-only view of a bundle with everything after `as_of` removed. All
/// forecasting code consumes views, which makes looking past the as-of date
/// structurally impossible.
class BundleView {
public:
    BundleView(const DatasetBundle& b, Date as_of);

    Date as_of() const { return as_of_; }
    const DatasetBundle& full_unsafe() const { return *bundle_; }
    const std::vector<GeoUnit>& geography() const { return bundle_->geography; }
    std::vector<std::string> state_ids() const { return bundle_->state_ids(); }
    std::string nation_id() const { return bundle_->nation_id(); }
    std::vector<std::string> neighbors_of(const std::string& id) const {
        return bundle_->neighbors_of(id);
    }
    const GeoUnit& geo(const std::string& id) const { return bundle_->geo(id); }
    std::vector<std::string> term_names() const { return bundle_->term_names(); }

    DailySeries daily(const std::string& geo_id, SignalKind kind) const;
    WeeklySeries ili(const std::string& geo_id) const;
    TrendSeries trend(const std::string& geo_id, const std::string& term) const;
    /// Saturday-aggregated weekly view of a daily signal, truncated at as_of.
    WeeklySeries weekly(const std::string& geo_id, SignalKind kind) const;

private:
    const DatasetBundle* bundle_;
    Date as_of_;
};

}  // namespace argo
