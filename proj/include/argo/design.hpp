#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "argo/bundle.hpp"
#include "argo/config.hpp"

namespace argo {

enum class ColumnKind { ArLag, WeeklyLag, SearchTerm, Weekday, IliLag };

struct DesignColumn {
    std::string name;
    ColumnKind kind;
    int lag_days;  // response date minus feature date; 0 for calendar indicators
};

/// A regression design with named columns plus the aligned prediction row for
/// the forecast date. Column order is fixed: AR lags, weekly lags, search
/// terms, weekday indicators, ILI lags.
struct DesignMatrix {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<DesignColumn> cols;
    std::vector<Date> response_dates;
    Eigen::VectorXd x_pred;  // features for the prediction response date
    Date pred_date;

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(cols.size());
        for (const auto& c : cols) out.push_back(c.name);
        return out;
    }
};

/// In-sample MSE scan of the one-variable regression target ~ lag(term);
/// returns the candidate lag with minimal MSE, smaller lag on ties.
int select_optimal_lag(const DailySeries& term, const DailySeries& target,
                       const std::vector<int>& candidate_lags,
                       Date window_start, Date window_end, int min_rows = 8);

/// Per-term optimal case/death lags selected from the view's national series
/// over the configured window.
LagTable build_lag_table(const BundleView& view, const RunConfig& cfg);

/// Daily COVID design for horizon `l` days as of T: M rows with response
/// dates T-M+1..T, the prediction row at T+l. AR block on the target signal,
/// weekly-lag block on cases, per-term search lags max(O_k, l), weekday
/// indicators (Sunday omitted), ILI lags from the imputed draw.
DesignMatrix build_case_design(const BundleView& view, const DailySeries& ili_draw,
                               const std::string& geo_id, int horizon_days,
                               const LagTable& lags, Date as_of, int train_days);

/// As build_case_design, but the AR block reads deaths and the weekly-lag
/// block stays on cases; search lags use the death-optimal lags.
DesignMatrix build_death_design(const BundleView& view, const DailySeries& ili_draw,
                                const std::string& geo_id, int horizon_days,
                                const LagTable& lags, Date as_of, int train_days);

/// Weekly %ILI design: AR lags 1..ar_lags, weekly flu search terms at one
/// week's lag, and weekly-aggregated COVID cases at lags 1..4 weeks as
/// exogenous columns. Prediction row targets the week ending T+7.
DesignMatrix build_ili_design(const BundleView& view, const std::string& geo_id,
                              Date as_of, int train_weeks, int ar_lags);

}  // namespace argo
