#include "argo/national.hpp"

#include <algorithm>
#include <cmath>

#include "argo/lasso.hpp"

namespace argo {

double median(std::vector<double> values) {
    if (values.empty()) throw Error("median of empty set");
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string method_name(const std::string& base, Target t) {
    return base + "-" + target_name(t);
}

ForecastTable forecast_national(const BundleView& view, const ImputationSet& imputations,
                                const RunConfig& cfg, Date as_of, Target signal,
                                const LagTable& lags, DailyForecastPanel* panel_out) {
    if (signal == Target::Ili) {
        throw Error("forecast_national handles cases/deaths; use forecast_national_ili");
    }
    const std::string nation = view.nation_id();
    const int max_week = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
    const int max_days = 7 * max_week;
    const int n_draws = static_cast<int>(imputations.n_draws());

    DailyForecastPanel panel;
    panel.as_of = as_of;
    panel.n_draws = n_draws;
    panel.per_draw.reserve(static_cast<std::size_t>(n_draws));

    auto build = [&](const DailySeries& draw, int l) {
        return signal == Target::Cases
                   ? build_case_design(view, draw, nation, l, lags, as_of,
                                       cfg.national_train_days)
                   : build_death_design(view, draw, nation, l, lags, as_of,
                                        cfg.national_train_days);
    };

    int failed = 0;
    for (int n = 0; n < n_draws; ++n) {
        try {
            const DailySeries& draw = imputations.draws[static_cast<std::size_t>(n)];
            std::vector<LassoModel> fits(static_cast<std::size_t>(max_days));
            std::vector<DesignMatrix> designs(static_cast<std::size_t>(max_days));
            for (int week = 0; week < max_week; ++week) {
                // One penalty per (signal, horizon-week, draw), selected on the
                // first day of the block and reused across its 7 days.
                DesignMatrix d0 = build(draw, 7 * week + 1);
                std::vector<double> grid =
                    lambda_grid_from_ratios(d0.x, d0.y, cfg.lambda_grid);
                double lam = cv_select(d0.x, d0.y, grid, cfg.cv_folds).chosen;
                for (int i = 1; i <= 7; ++i) {
                    int l = 7 * week + i;
                    DesignMatrix d = i == 1 ? std::move(d0) : build(draw, l);
                    fits[static_cast<std::size_t>(l - 1)] =
                        lasso_fit(d.x, d.y, lam, d.names());
                    designs[static_cast<std::size_t>(l - 1)] = std::move(d);
                }
            }
            std::vector<double> preds(static_cast<std::size_t>(max_days));
            for (int l = 1; l <= max_days; ++l) {
                // Three-day moving average of coefficients across adjacent
                // horizons; the block structure is identical for every l.
                double intercept = 0.0;
                Eigen::VectorXd coef =
                    Eigen::VectorXd::Zero(fits[static_cast<std::size_t>(l - 1)].coef.size());
                int used = 0;
                for (int l2 = l - 1; l2 <= l + 1; ++l2) {
                    if (l2 < 1 || l2 > max_days) continue;
                    intercept += fits[static_cast<std::size_t>(l2 - 1)].intercept;
                    coef += fits[static_cast<std::size_t>(l2 - 1)].coef;
                    ++used;
                }
                intercept /= used;
                coef /= used;
                preds[static_cast<std::size_t>(l - 1)] =
                    intercept + coef.dot(designs[static_cast<std::size_t>(l - 1)].x_pred);
            }
            panel.per_draw.push_back(std::move(preds));
        } catch (const Error&) {
            ++failed;
            if (failed * 10 > n_draws) throw;
        }
    }
    if (panel.per_draw.empty()) throw Error("forecast_national: all draws failed");

    panel.final_daily.resize(static_cast<std::size_t>(max_days));
    panel.clipped.assign(static_cast<std::size_t>(max_days), false);
    for (int l = 1; l <= max_days; ++l) {
        std::vector<double> vals;
        vals.reserve(panel.per_draw.size());
        for (const auto& draw : panel.per_draw) {
            vals.push_back(draw[static_cast<std::size_t>(l - 1)]);
        }
        double v = median(std::move(vals));
        if (v < 0.0) {
            v = 0.0;
            panel.clipped[static_cast<std::size_t>(l - 1)] = true;
        }
        panel.final_daily[static_cast<std::size_t>(l - 1)] = v;
    }

    ForecastTable out;
    for (int h : cfg.horizons) {
        double weekly = 0.0;
        for (int i = 7 * (h - 1) + 1; i <= 7 * h; ++i) {
            weekly += panel.final_daily[static_cast<std::size_t>(i - 1)];
        }
        out.add({nation, as_of.plus_weeks(h), h, method_name("argo-joint", signal), weekly});
    }
    if (panel_out) *panel_out = std::move(panel);
    return out;
}

ForecastTable forecast_national_ili(const BundleView& view, const RunConfig& cfg,
                                    Date as_of) {
    const std::string nation = view.nation_id();
    DesignMatrix d = build_ili_design(view, nation, as_of, cfg.ili_train_weeks,
                                      cfg.ili_ar_lags);
    std::vector<double> grid = lambda_grid_from_ratios(d.x, d.y, cfg.lambda_grid);
    double lam = cv_select(d.x, d.y, grid, cfg.cv_folds).chosen;
    LassoModel m = lasso_fit(d.x, d.y, lam, d.names());
    double pred = std::max(0.0, m.predict(d.x_pred));
    ForecastTable out;
    out.add({nation, d.pred_date, 1, "argo-joint-ili", pred});
    return out;
}

}  // namespace argo
