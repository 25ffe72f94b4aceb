#pragma once

#include <map>
#include <string>
#include <vector>

#include "argo/forecast_table.hpp"
#include "argo/series.hpp"

namespace argo {

/// Persistence: the value at T repeated for every requested horizon.
ForecastTable naive_forecast(const WeeklySeries& truth, Date as_of,
                             const std::vector<int>& horizons,
                             const std::string& method);

/// Least-squares AR(3) with intercept fitted on the trailing window; one-step
/// forecast for the week after T.
double ar3_forecast(const WeeklySeries& series, Date as_of, int train_weeks);

/// VAR(1) with intercept via per-equation least squares; one-step forecasts
/// per series, keyed like the input map.
std::map<std::string, double> var1_forecast(
    const std::map<std::string, WeeklySeries>& panel, Date as_of, int train_weeks);

}  // namespace argo
