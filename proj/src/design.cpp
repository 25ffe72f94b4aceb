#include "argo/design.hpp"

#include <algorithm>
#include <cmath>

namespace argo {

int select_optimal_lag(const DailySeries& term, const DailySeries& target,
                       const std::vector<int>& candidate_lags,
                       Date window_start, Date window_end, int min_rows) {
    if (candidate_lags.empty()) throw Error("select_optimal_lag: no candidate lags");
    int best_lag = 0;
    double best_mse = 0.0;
    bool have_best = false;
    std::vector<int> sorted_lags = candidate_lags;
    std::sort(sorted_lags.begin(), sorted_lags.end());
    for (int d : sorted_lags) {
        // Overlap of target dates and shifted term dates inside the window.
        Date lo = std::max(window_start, std::max(target.start(), term.start().plus_days(d)));
        Date hi = std::min(window_end, std::min(target.end(), term.end().plus_days(d)));
        long rows = lo.days_until(hi) + 1;
        if (rows < min_rows) {
            throw Error("select_optimal_lag: lag " + std::to_string(d) + " leaves " +
                        std::to_string(std::max<long>(rows, 0)) + " rows (< " +
                        std::to_string(min_rows) + ")");
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        for (Date t = lo; t <= hi; t = t.plus_days(1)) {
            double x = term.at(t.plus_days(-d));
            double y = target.at(t);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            syy += y * y;
        }
        double n = static_cast<double>(rows);
        double vx = sxx - sx * sx / n;
        double cxy = sxy - sx * sy / n;
        double vy = syy - sy * sy / n;
        // MSE of y ~ a + b x: (vy - cxy^2/vx)/n; degenerate x keeps vy only.
        double rss = vx > 1e-12 * std::max(1.0, sxx / n) ? vy - cxy * cxy / vx : vy;
        double mse = std::max(rss, 0.0) / n;
        if (!have_best || mse < best_mse) {
            best_mse = mse;
            best_lag = d;
            have_best = true;
        }
    }
    return best_lag;
}

LagTable build_lag_table(const BundleView& view, const RunConfig& cfg) {
    std::string nation = view.nation_id();
    DailySeries cases = view.daily(nation, SignalKind::Cases);
    DailySeries deaths = view.daily(nation, SignalKind::Deaths);
    Date win_start = cfg.lag_window_start.value_or(cases.start().plus_days(35));
    Date win_end = cfg.lag_window_end.value_or(view.as_of());
    std::vector<int> candidates;
    for (int d = cfg.lag_candidates_from_to[0]; d <= cfg.lag_candidates_from_to[1]; ++d) {
        candidates.push_back(d);
    }
    LagTable table;
    for (const std::string& term : view.term_names()) {
        TrendSeries t = view.trend(nation, term);
        if (!t.is_daily()) continue;  // weekly terms feed the %ILI design only
        TermLags lags;
        lags.case_lag = select_optimal_lag(*t.daily, cases, candidates, win_start, win_end);
        lags.death_lag = select_optimal_lag(*t.daily, deaths, candidates, win_start, win_end);
        table.terms[term] = lags;
    }
    if (table.terms.empty()) throw Error("build_lag_table: no daily search terms");
    return table;
}

namespace {

struct FeatureSpec {
    std::string name;
    ColumnKind kind;
    int lag_days;                  // ignored for Weekday
    const DailySeries* source;     // null for Weekday
    int weekday = 0;               // 1=Mon..6=Sat for Weekday columns
};

DesignMatrix assemble_daily(const std::vector<FeatureSpec>& specs,
                            const DailySeries& response, int horizon_days,
                            Date as_of, int train_days) {
    const int m_rows = train_days;
    Date first_response = as_of.plus_days(-(m_rows - 1));
    // Every feature must reach back far enough at the earliest row.
    for (const FeatureSpec& f : specs) {
        if (f.kind == ColumnKind::Weekday) continue;
        Date needed = first_response.plus_days(-f.lag_days);
        if (f.source->start() > needed) {
            throw Error("insufficient history: column " + f.name + " needs " +
                        needed.to_string() + " but data start at " +
                        f.source->start().to_string());
        }
    }
    if (response.start() > first_response || response.end() < as_of) {
        throw Error("insufficient history: response needs " + first_response.to_string() +
                    ".." + as_of.to_string());
    }

    DesignMatrix d;
    d.x.resize(m_rows, static_cast<Eigen::Index>(specs.size()));
    d.y.resize(m_rows);
    d.response_dates.reserve(static_cast<std::size_t>(m_rows));
    d.pred_date = as_of.plus_days(horizon_days);
    d.x_pred.resize(static_cast<Eigen::Index>(specs.size()));

    for (int r = 0; r < m_rows; ++r) {
        Date resp = first_response.plus_days(r);
        d.response_dates.push_back(resp);
        d.y[r] = response.at(resp);
    }
    for (std::size_t c = 0; c < specs.size(); ++c) {
        const FeatureSpec& f = specs[c];
        d.cols.push_back({f.name, f.kind, f.kind == ColumnKind::Weekday ? 0 : f.lag_days});
        for (int r = 0; r < m_rows; ++r) {
            Date resp = d.response_dates[static_cast<std::size_t>(r)];
            double v;
            if (f.kind == ColumnKind::Weekday) {
                v = resp.iso_weekday() == static_cast<unsigned>(f.weekday) ? 1.0 : 0.0;
            } else {
                v = f.source->at(resp.plus_days(-f.lag_days));
            }
            d.x(r, static_cast<Eigen::Index>(c)) = v;
        }
        double pv;
        if (f.kind == ColumnKind::Weekday) {
            pv = d.pred_date.iso_weekday() == static_cast<unsigned>(f.weekday) ? 1.0 : 0.0;
        } else {
            Date fd = d.pred_date.plus_days(-f.lag_days);
            if (fd > as_of) {
                throw Error("leakage: column " + f.name + " would read " + fd.to_string() +
                            " past as-of " + as_of.to_string());
            }
            pv = f.source->at(fd);
        }
        d.x_pred[static_cast<Eigen::Index>(c)] = pv;
    }
    return d;
}

const char* kWeekdayNames[7] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

DesignMatrix build_covid_design(const BundleView& view, const DailySeries& ili_draw,
                                const std::string& geo_id, int horizon_days,
                                const LagTable& lags, Date as_of, int train_days,
                                bool deaths_target) {
    if (horizon_days < 1) throw Error("horizon must be >= 1 day");
    const int l = horizon_days;
    DailySeries cases = view.daily(geo_id, SignalKind::Cases);
    DailySeries target = deaths_target ? view.daily(geo_id, SignalKind::Deaths) : cases;

    // Term features live at the same geographic level as the target.
    std::vector<std::pair<std::string, DailySeries>> terms;
    for (const auto& [term, tl] : lags.terms) {
        TrendSeries t = view.trend(geo_id, term);
        if (!t.is_daily()) {
            throw Error("term '" + term + "' in the lag table must be a daily series");
        }
        terms.emplace_back(term, *t.daily);
        (void)tl;
    }

    std::vector<FeatureSpec> specs;
    const std::string tgt = deaths_target ? "deaths" : "cases";
    // AR lags 0..6 of the target at the as-of edge: feature date t - i for
    // response date t + l, so the effective lag is l + i.
    for (int i = 0; i <= 6; ++i) {
        specs.push_back({"ar_" + tgt + "_" + std::to_string(i), ColumnKind::ArLag,
                         l + i, &target, 0});
    }
    // Weekly lags of cases, adjusted to the horizon. Slots stay fixed so that
    // coefficients align across horizons.
    for (int base : {7, 14, 21, 28}) {
        specs.push_back({"wk_cases_" + std::to_string(base), ColumnKind::WeeklyLag,
                         std::max(base, l), &cases, 0});
    }
    for (auto& [term, series] : terms) {
        int o = deaths_target ? lags.terms.at(term).death_lag : lags.terms.at(term).case_lag;
        specs.push_back({"term_" + term, ColumnKind::SearchTerm, std::max(o, l),
                         &series, 0});
    }
    for (int r = 1; r <= 6; ++r) {
        specs.push_back({std::string("wd_") + kWeekdayNames[r - 1], ColumnKind::Weekday,
                         0, nullptr, r});
    }
    for (int base : {7, 14, 21, 28}) {
        specs.push_back({"ili_" + std::to_string(base), ColumnKind::IliLag,
                         std::max(base, l), &ili_draw, 0});
    }
    return assemble_daily(specs, target, l, as_of, train_days);
}

}  // namespace

DesignMatrix build_case_design(const BundleView& view, const DailySeries& ili_draw,
                               const std::string& geo_id, int horizon_days,
                               const LagTable& lags, Date as_of, int train_days) {
    return build_covid_design(view, ili_draw, geo_id, horizon_days, lags, as_of,
                              train_days, false);
}

DesignMatrix build_death_design(const BundleView& view, const DailySeries& ili_draw,
                                const std::string& geo_id, int horizon_days,
                                const LagTable& lags, Date as_of, int train_days) {
    return build_covid_design(view, ili_draw, geo_id, horizon_days, lags, as_of,
                              train_days, true);
}

DesignMatrix build_ili_design(const BundleView& view, const std::string& geo_id,
                              Date as_of, int train_weeks, int ar_lags) {
    WeeklySeries ili = view.ili(geo_id);
    WeeklySeries wk_cases = view.weekly(geo_id, SignalKind::Cases);

    std::vector<std::pair<std::string, WeeklySeries>> flu_terms;
    for (const std::string& term : view.term_names()) {
        TrendSeries t = view.trend(geo_id, term);
        if (t.is_daily()) continue;  // daily terms belong to the COVID designs
        flu_terms.emplace_back(term, *t.weekly);
    }

    const int covid_lags = 4;
    Date first_response = as_of.plus_weeks(-(train_weeks - 1));
    if (!ili.covers(as_of) || !ili.covers(first_response)) {
        throw Error("insufficient history: %ILI needs weeks " +
                    first_response.to_string() + ".." + as_of.to_string());
    }
    Date earliest_needed = first_response.plus_weeks(-std::max(ar_lags, covid_lags));
    if (ili.first_week() > first_response.plus_weeks(-ar_lags) ||
        wk_cases.first_week() > earliest_needed) {
        throw Error("insufficient history for %ILI design as of " + as_of.to_string());
    }

    DesignMatrix d;
    const std::size_t p = static_cast<std::size_t>(ar_lags) + flu_terms.size() + covid_lags;
    d.x.resize(train_weeks, static_cast<Eigen::Index>(p));
    d.y.resize(train_weeks);
    d.pred_date = as_of.plus_weeks(1);
    d.x_pred.resize(static_cast<Eigen::Index>(p));

    for (int j = 1; j <= ar_lags; ++j) {
        d.cols.push_back({"ar_ili_" + std::to_string(j), ColumnKind::ArLag, 7 * j});
    }
    for (const auto& [term, _] : flu_terms) {
        d.cols.push_back({"term_" + term, ColumnKind::SearchTerm, 7});
    }
    for (int j = 1; j <= covid_lags; ++j) {
        d.cols.push_back({"wk_cases_" + std::to_string(j), ColumnKind::WeeklyLag, 7 * j});
    }

    auto fill_row = [&](Eigen::Index row, Date resp, Eigen::VectorXd* pred) {
        Eigen::Index c = 0;
        auto put = [&](double v) {
            if (pred) (*pred)[c] = v;
            else d.x(row, c) = v;
            ++c;
        };
        for (int j = 1; j <= ar_lags; ++j) put(ili.at(resp.plus_weeks(-j)));
        for (const auto& [_, series] : flu_terms) {
            Date fd = resp.plus_weeks(-1);
            // Missing early trend weeks read as zero signal.
            put(series.covers(fd) ? series.at(fd) : 0.0);
        }
        for (int j = 1; j <= covid_lags; ++j) {
            Date fd = resp.plus_weeks(-j);
            put(wk_cases.covers(fd) ? wk_cases.at(fd) : 0.0);
        }
    };

    for (int r = 0; r < train_weeks; ++r) {
        Date resp = first_response.plus_weeks(r);
        d.response_dates.push_back(resp);
        d.y[r] = ili.at(resp);
        fill_row(r, resp, nullptr);
    }
    fill_row(0, d.pred_date, &d.x_pred);
    return d;
}

}  // namespace argo
