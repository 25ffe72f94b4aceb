#pragma once

#include <vector>

#include "argo/design.hpp"
#include "argo/forecast_table.hpp"
#include "argo/imputation.hpp"

namespace argo {

/// Per-draw daily predictions for horizons 1..max_days as of T, before and
/// after the median reduction.
struct DailyForecastPanel {
    Date as_of;
    int n_draws = 0;
    std::vector<std::vector<double>> per_draw;  // [draw][l-1]
    std::vector<double> final_daily;            // median across draws, floored at 0
    std::vector<bool> clipped;                  // true where the floor engaged
    bool smoothed = true;                       // 3-day coefficient moving average
};

/// National ARGO pipeline for daily incremental cases or deaths: per draw and
/// per day-ahead l, an L1 fit on the day-l design with coefficients averaged
/// over the neighboring horizons l-1, l, l+1; the per-day forecast is the
/// median across draws; weekly forecasts are 7-day sums.
ForecastTable forecast_national(const BundleView& view, const ImputationSet& imputations,
                                const RunConfig& cfg, Date as_of, Target signal,
                                const LagTable& lags,
                                DailyForecastPanel* panel_out = nullptr);

/// One-week-ahead %ILI via the weekly design with COVID exogenous columns.
ForecastTable forecast_national_ili(const BundleView& view, const RunConfig& cfg,
                                    Date as_of);

double median(std::vector<double> values);

/// Method name used in forecast tables: base suffixed with the target so the
/// (geo, week, horizon, method) key stays unique across targets.
std::string method_name(const std::string& base, Target t);

}  // namespace argo
