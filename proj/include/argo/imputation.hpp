#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "argo/bundle.hpp"
#include "argo/series.hpp"

namespace argo {

/// N imputed daily ILI sequences for one geography. Every draw conserves the
/// weekly mass: the 7 imputed values of week tau sum to the weekly ILI.
struct ImputationSet {
    GeoUnit geo;
    WeeklySeries weekly;                     // the source weekly ILI
    std::vector<DailySeries> draws;          // N daily series, Sunday..Saturday weeks
    std::vector<std::vector<int>> source_weeks;  // [draw][week] -> donor week index
    std::vector<std::vector<bool>> zero_donor;   // flagged uniform fallbacks

    std::size_t n_draws() const { return draws.size(); }
    std::size_t n_weeks() const { return weekly.size(); }
};

struct ImputationOptions {
    int draws = 100;
    bool include_current = true;             // donor pool {first..tau} vs {first..tau-1}
    std::optional<Date> first_eligible_week; // earliest donor week ending
};

/// Distribute one week of ILI across 7 days in proportion to the donor
/// profile. A donor summing to zero falls back to the uniform profile and is
/// reported through `zero_donor`.
std::array<double, 7> impute_week(const std::array<double, 7>& donor_cases,
                                  double weekly_ili, bool* zero_donor = nullptr);

/// Algorithm: for each draw and week tau, pick a donor week uniformly from
/// the eligible pool, then scale its daily case profile to the weekly ILI.
ImputationSet impute_area(const WeeklySeries& weekly_ili, const DailySeries& daily_cases,
                          const ImputationOptions& opt, std::uint64_t seed);

/// Weekly aggregation of a draw; equal to the source weekly series by mass
/// conservation regardless of which draw is used.
WeeklySeries weekly_view(const ImputationSet& set, std::size_t draw = 0);

/// Audit dump: `draw,date,geo,value,donor_week`.
void write_imputation_csv(const ImputationSet& set, const std::string& path);

}  // namespace argo
