#include "argo/backtest.hpp"

#include <algorithm>
#include <cmath>

#include "argo/baselines.hpp"
#include "argo/csv.hpp"
#include "argo/parallel.hpp"

namespace argo {

Pipeline::Pipeline(const DatasetBundle& bundle, const RunConfig& cfg, Date lag_as_of)
    : bundle_(&bundle), cfg_(&cfg), raw_(bundle, cfg) {
    cfg.validate();
    bool needs_lags = wants(Target::Cases) || wants(Target::Deaths);
    if (!cfg.lag_table_csv.empty()) {
        lag_table_ = LagTable::load_csv(cfg.lag_table_csv);
    } else if (needs_lags) {
        lag_table_ = build_lag_table(BundleView(bundle, lag_as_of), cfg);
    }
}

bool Pipeline::wants(Target t) const {
    return std::find(cfg_->targets.begin(), cfg_->targets.end(), t) != cfg_->targets.end();
}

std::shared_ptr<const std::map<std::string, ImputationSet>> Pipeline::imputations(
    Date T) const {
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = imputation_cache_.find(T.serial());
        if (it != imputation_cache_.end()) return it->second;
    }
    BundleView view(*bundle_, T);
    ImputationOptions opt;
    opt.draws = cfg_->imputation_draws;
    opt.include_current = cfg_->donor_include_current;
    opt.first_eligible_week = cfg_->first_eligible_week;
    auto sets = std::make_shared<std::map<std::string, ImputationSet>>();
    std::vector<std::string> geos = view.state_ids();
    geos.push_back(view.nation_id());
    for (const std::string& g : geos) {
        sets->emplace(g, impute_area(view.ili(g), view.daily(g, SignalKind::Cases), opt,
                                     cfg_->seed));
    }
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, _] = imputation_cache_.emplace(T.serial(), std::move(sets));
    // Keep the cache small; backtests touch each as-of once per constituent
    // group and workers run a handful of as-ofs concurrently.
    while (imputation_cache_.size() > 6) {
        auto victim = imputation_cache_.begin();
        if (victim->first == T.serial()) ++victim;
        imputation_cache_.erase(victim);
    }
    return it->second;
}

ForecastTable Pipeline::national_rows(Date T) const {
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = national_cache_.find(T.serial());
        if (it != national_cache_.end()) return *it->second;
    }
    BundleView view(*bundle_, T);
    ForecastTable out;
    auto sets = imputations(T);
    const std::string nation = view.nation_id();
    if (wants(Target::Cases)) {
        out.merge(forecast_national(view, sets->at(nation), *cfg_, T, Target::Cases,
                                    lag_table_));
    }
    if (wants(Target::Deaths)) {
        out.merge(forecast_national(view, sets->at(nation), *cfg_, T, Target::Deaths,
                                    lag_table_));
    }
    if (wants(Target::Ili)) {
        out.merge(forecast_national_ili(view, *cfg_, T));
    }
    std::lock_guard<std::mutex> lock(mu_);
    national_cache_.emplace(T.serial(), std::make_shared<const ForecastTable>(out));
    while (national_cache_.size() > 64) national_cache_.erase(national_cache_.begin());
    return out;
}

ForecastTable Pipeline::disagg_rows(Date T) const {
    BundleView view(*bundle_, T);
    ForecastTable national = national_rows(T);
    ForecastTable out;
    const std::string nation = view.nation_id();
    const int share_weeks = 4;
    for (Target target : cfg_->targets) {
        std::vector<int> horizons =
            target == Target::Ili ? std::vector<int>{1} : cfg_->horizons;
        // Allocation weights from the trailing weeks: share of the national
        // count for cases/deaths, mean ratio to the national %ILI otherwise.
        std::map<std::string, double> weight;
        if (target == Target::Ili) {
            WeeklySeries nat = view.ili(nation);
            for (const std::string& m : view.state_ids()) {
                WeeklySeries st = view.ili(m);
                double acc = 0.0;
                for (int i = 0; i < share_weeks; ++i) {
                    Date w = T.plus_weeks(-i);
                    double denom = nat.at(w);
                    acc += denom > 1e-9 ? st.at(w) / denom : 1.0;
                }
                weight[m] = acc / share_weeks;
            }
        } else {
            SignalKind kind =
                target == Target::Cases ? SignalKind::Cases : SignalKind::Deaths;
            WeeklySeries nat = view.weekly(nation, kind);
            double nat_total = 0.0;
            std::map<std::string, double> state_total;
            for (const std::string& m : view.state_ids()) {
                WeeklySeries st = view.weekly(m, kind);
                double acc = 0.0;
                for (int i = 0; i < share_weeks; ++i) acc += st.at(T.plus_weeks(-i));
                state_total[m] = acc;
            }
            for (int i = 0; i < share_weeks; ++i) nat_total += nat.at(T.plus_weeks(-i));
            for (const std::string& m : view.state_ids()) {
                weight[m] = nat_total > 1e-9
                                ? state_total[m] / nat_total
                                : 1.0 / static_cast<double>(view.state_ids().size());
            }
        }
        const std::string method = method_name("argo-national-disagg", target);
        for (int h : horizons) {
            const ForecastRow* nat_row = national.find(
                nation, T.plus_weeks(h), h,
                target == Target::Ili ? "argo-joint-ili" : method_name("argo-joint", target));
            if (!nat_row) {
                throw Error("disagg: missing national forecast for " + target_name(target));
            }
            for (const std::string& m : view.state_ids()) {
                out.add({m, T.plus_weeks(h), h, method,
                         std::max(0.0, nat_row->value * weight.at(m))});
            }
        }
    }
    return out;
}

ForecastTable Pipeline::argox_rows(Date T) const {
    BundleView view(*bundle_, T);
    ForecastTable out;
    std::shared_ptr<const std::map<std::string, ImputationSet>> sets;
    for (Target target : cfg_->targets) {
        if (target != Target::Ili && !sets) sets = imputations(T);
        static const std::map<std::string, ImputationSet> kEmpty;
        out.merge(forecast_state(view, raw_, target == Target::Ili ? kEmpty : *sets,
                                 *cfg_, T, target));
    }
    return out;
}

ForecastTable Pipeline::gt_raw_rows(Date T) const {
    BundleView view(*bundle_, T);
    ForecastTable out;
    for (Target target : cfg_->targets) {
        out.merge(forecast_state_gt_raw(view, raw_, *cfg_, T, target));
    }
    return out;
}

ForecastTable Pipeline::naive_rows(Date T) const {
    BundleView view(*bundle_, T);
    ForecastTable out;
    std::vector<std::string> geos = view.state_ids();
    geos.push_back(view.nation_id());
    for (Target target : cfg_->targets) {
        std::vector<int> horizons =
            target == Target::Ili ? std::vector<int>{1} : cfg_->horizons;
        for (const std::string& g : geos) {
            WeeklySeries truth = target == Target::Ili
                                     ? view.ili(g)
                                     : view.weekly(g, target == Target::Cases
                                                          ? SignalKind::Cases
                                                          : SignalKind::Deaths);
            out.merge(naive_forecast(truth, T, horizons, method_name("naive", target)));
        }
    }
    return out;
}

ForecastTable Pipeline::baseline_rows(Date T) const {
    ForecastTable out;
    if (!wants(Target::Ili)) return out;
    BundleView view(*bundle_, T);
    std::map<std::string, WeeklySeries> panel;
    for (const std::string& m : view.state_ids()) panel.emplace(m, view.ili(m));
    out.add({view.nation_id(), T.plus_weeks(1), 1, "ar3-ili",
             ar3_forecast(view.ili(view.nation_id()), T, cfg_->ili_train_weeks)});
    for (const auto& [m, s] : panel) {
        out.add({m, T.plus_weeks(1), 1, "ar3-ili", ar3_forecast(s, T, cfg_->ili_train_weeks)});
    }
    for (const auto& [m, v] : var1_forecast(panel, T, cfg_->state_train_weeks)) {
        out.add({m, T.plus_weeks(1), 1, "var1-ili", v});
    }
    return out;
}

ConstituentRegistry Pipeline::registry() const {
    ConstituentRegistry reg;
    reg.add({"argo-national-disagg",
             [this](const BundleView&, const RunConfig&, Date T) { return disagg_rows(T); }});
    reg.add({"argox-idv",
             [this](const BundleView&, const RunConfig&, Date T) { return argox_rows(T); }});
    reg.add({"naive",
             [this](const BundleView&, const RunConfig&, Date T) { return naive_rows(T); }});
    reg.add({"state-gt-raw",
             [this](const BundleView&, const RunConfig&, Date T) { return gt_raw_rows(T); }});
    return reg;
}

TruthLookup Pipeline::truth_lookup() const {
    const DatasetBundle* b = bundle_;
    return [b](const std::string& geo, Target target, Date week) -> std::optional<double> {
        try {
            WeeklySeries truth = truth_weekly(*b, geo, target);
            if (!truth.covers(week)) return std::nullopt;
            return truth.at(week);
        } catch (const Error&) {
            return std::nullopt;
        }
    };
}

namespace {

int max_horizon(const RunConfig& cfg) {
    bool covid = false;
    for (Target t : cfg.targets) covid |= t != Target::Ili;
    if (!covid) return 1;
    return *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
}

MetricReport score(const ForecastTable& table, const TruthLookup& truth, Date start,
                   Date end) {
    struct Acc {
        std::vector<double> pred, actual;
    };
    std::map<std::tuple<std::string, std::string, int>, Acc> groups;
    for (const ForecastRow& r : table.rows()) {
        Date implied_asof = r.target_week.plus_weeks(-r.horizon);
        if (implied_asof < start || implied_asof > end) continue;
        Target target = Target::Cases;
        if (r.method.ends_with("-deaths")) target = Target::Deaths;
        else if (r.method.ends_with("-ili")) target = Target::Ili;
        std::optional<double> actual = truth(r.geo, target, r.target_week);
        if (!actual) continue;
        Acc& acc = groups[{r.geo, r.method, r.horizon}];
        acc.pred.push_back(r.value);
        acc.actual.push_back(*actual);
    }
    MetricReport report;
    struct AvgAcc {
        double rmse_sum = 0.0, mae_sum = 0.0, corr_sum = 0.0;
        int n = 0, n_corr = 0;
    };
    std::map<std::pair<std::string, int>, AvgAcc> averages;
    for (const auto& [key, acc] : groups) {
        const auto& [geo, method, horizon] = key;
        MetricRow row;
        row.geo = geo;
        row.method = method;
        row.horizon = horizon;
        row.rmse_v = rmse(acc.pred, acc.actual);
        row.mae_v = mae(acc.pred, acc.actual);
        row.corr = acc.pred.size() >= 2 ? pearson(acc.pred, acc.actual) : std::nullopt;
        row.n = static_cast<int>(acc.pred.size());
        report.rows.push_back(row);
        AvgAcc& avg = averages[{method, horizon}];
        avg.rmse_sum += row.rmse_v;
        avg.mae_sum += row.mae_v;
        if (row.corr) {
            avg.corr_sum += *row.corr;
            ++avg.n_corr;
        }
        ++avg.n;
    }
    for (const auto& [key, avg] : averages) {
        MetricRow row;
        row.geo = "AVG";
        row.method = key.first;
        row.horizon = key.second;
        row.rmse_v = avg.rmse_sum / avg.n;
        row.mae_v = avg.mae_sum / avg.n;
        // Undefined correlations stay out of the average; n_corr discloses
        // how many geos contributed.
        if (avg.n_corr > 0) row.corr = avg.corr_sum / avg.n_corr;
        row.n = avg.n;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace

BacktestResult run_backtest(const DatasetBundle& bundle, const RunConfig& cfg,
                            Date start, Date end,
                            const ConstituentRegistry* registry_override) {
    if (!start.is_saturday() || !end.is_saturday()) {
        throw Error("backtest: start/end must be Saturdays");
    }
    if (end < start) throw Error("backtest: end before start");

    Pipeline pipe(bundle, cfg, start);
    ConstituentRegistry reg = registry_override ? *registry_override : pipe.registry();

    const int warmup = cfg.ensemble_window_weeks - 1 + max_horizon(cfg);
    Date first_asof = start.plus_weeks(-warmup);
    std::vector<Date> asofs;
    for (Date t = first_asof; t <= end; t = t.plus_weeks(1)) asofs.push_back(t);

    // Phase 1: constituents and baselines per as-of, in parallel. Each slot
    // is a pure function of (bundle, cfg, T), so the merge order is fixed.
    auto names = reg.names();
    const bool emit_national =
        std::find(names.begin(), names.end(), "argo-national-disagg") != names.end();
    std::vector<ForecastTable> slots(asofs.size());
    parallel_for(asofs.size(), cfg.threads, [&](std::size_t i) {
        Date T = asofs[i];
        BundleView view(bundle, T);
        ForecastTable t;
        for (const Constituent& c : reg.constituents()) {
            t.merge(c.fn(view, cfg, T));
        }
        if (emit_national) t.merge(pipe.national_rows(T));
        if (T >= start) t.merge(pipe.baseline_rows(T));
        slots[i] = std::move(t);
    });
    ForecastTable history;
    for (ForecastTable& t : slots) history.merge(t);

    // Phase 2: winner-takes-all selection per evaluation as-of, sequential.
    TruthLookup truth = pipe.truth_lookup();
    BacktestResult result;
    std::vector<SelectionEntry> selections;
    ForecastTable ensemble_rows;
    for (Date T = start; T <= end; T = T.plus_weeks(1)) {
        ensemble_rows.merge(forecast_ensemble(history, history, truth, reg.names(), cfg,
                                              bundle.state_ids(), T, &selections));
    }
    history.merge(ensemble_rows);

    result.report = score(history, truth, start, end);
    result.forecasts = std::move(history);
    result.selections = std::move(selections);
    return result;
}

void write_series_csv(const ForecastTable& t, const DatasetBundle& bundle,
                      const std::string& path) {
    struct Line {
        Date date;
        std::string geo, method;
        int horizon;
        double value;
        std::optional<double> truth;
    };
    std::vector<Line> lines;
    for (const ForecastRow& r : t.rows()) {
        Target target = Target::Cases;
        if (r.method.ends_with("-deaths")) target = Target::Deaths;
        else if (r.method.ends_with("-ili")) target = Target::Ili;
        std::optional<double> actual;
        try {
            WeeklySeries truth = truth_weekly(bundle, r.geo, target);
            if (truth.covers(r.target_week)) actual = truth.at(r.target_week);
        } catch (const Error&) {
        }
        lines.push_back({r.target_week, r.geo, r.method, r.horizon, r.value, actual});
    }
    std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        return std::tie(a.date, a.geo, a.method, a.horizon) <
               std::tie(b.date, b.geo, b.method, b.horizon);
    });
    CsvWriter w(path, {"date", "geo", "method", "horizon", "value", "truth"});
    for (const Line& l : lines) {
        w.row({l.date.to_string(), l.geo, l.method, std::to_string(l.horizon),
               format_double(l.value), l.truth ? format_double(*l.truth) : ""});
    }
    w.close();
}

}  // namespace argo
