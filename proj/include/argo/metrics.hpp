#pragma once

#include <optional>
#include <string>
#include <vector>

#include "argo/forecast_table.hpp"

namespace argo {

double rmse(const std::vector<double>& pred, const std::vector<double>& truth);
double mae(const std::vector<double>& pred, const std::vector<double>& truth);
/// Pearson correlation; nullopt (never NaN) when either side has zero variance.
std::optional<double> pearson(const std::vector<double>& pred,
                              const std::vector<double>& truth);

struct MetricRow {
    std::string geo;  // state/nation id, or "AVG" for the cross-geo average
    std::string method;
    int horizon = 1;
    double rmse_v = 0.0;
    double mae_v = 0.0;
    std::optional<double> corr;
    // Weeks scored for per-geo rows; geos averaged for AVG rows.
    int n = 0;
};

struct MetricReport {
    std::vector<MetricRow> rows;
};

void write_metrics_csv(const MetricReport& report, const std::string& path);

}  // namespace argo
