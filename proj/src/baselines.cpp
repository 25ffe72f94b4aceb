#include "argo/baselines.hpp"

#include <Eigen/Dense>

namespace argo {

ForecastTable naive_forecast(const WeeklySeries& truth, Date as_of,
                             const std::vector<int>& horizons,
                             const std::string& method) {
    double v = truth.at(as_of);
    ForecastTable out;
    for (int h : horizons) {
        out.add({truth.geo().id, as_of.plus_weeks(h), h, method, v});
    }
    return out;
}

double ar3_forecast(const WeeklySeries& series, Date as_of, int train_weeks) {
    const int p = 3;
    Date first_resp = as_of.plus_weeks(-(train_weeks - 1));
    if (!series.covers(first_resp.plus_weeks(-p)) || !series.covers(as_of)) {
        throw Error("ar3_forecast: insufficient history as of " + as_of.to_string());
    }
    Eigen::MatrixXd x(train_weeks, p + 1);
    Eigen::VectorXd y(train_weeks);
    for (int r = 0; r < train_weeks; ++r) {
        Date resp = first_resp.plus_weeks(r);
        y[r] = series.at(resp);
        x(r, 0) = 1.0;
        for (int j = 1; j <= p; ++j) x(r, j) = series.at(resp.plus_weeks(-j));
    }
    Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
    double pred = beta[0];
    for (int j = 1; j <= p; ++j) pred += beta[j] * series.at(as_of.plus_weeks(-(j - 1)));
    return pred;
}

std::map<std::string, double> var1_forecast(
    const std::map<std::string, WeeklySeries>& panel, Date as_of, int train_weeks) {
    if (panel.empty()) throw Error("var1_forecast: empty panel");
    const int k = static_cast<int>(panel.size());
    Date first_resp = as_of.plus_weeks(-(train_weeks - 1));
    std::vector<const WeeklySeries*> series;
    for (const auto& [_, s] : panel) {
        if (!s.covers(first_resp.plus_weeks(-1)) || !s.covers(as_of)) {
            throw Error("var1_forecast: insufficient history for " + s.geo().id);
        }
        series.push_back(&s);
    }
    Eigen::MatrixXd x(train_weeks, k + 1);
    Eigen::MatrixXd y(train_weeks, k);
    for (int r = 0; r < train_weeks; ++r) {
        Date resp = first_resp.plus_weeks(r);
        x(r, 0) = 1.0;
        for (int j = 0; j < k; ++j) {
            x(r, j + 1) = series[static_cast<std::size_t>(j)]->at(resp.plus_weeks(-1));
            y(r, j) = series[static_cast<std::size_t>(j)]->at(resp);
        }
    }
    Eigen::MatrixXd beta = x.colPivHouseholderQr().solve(y);  // (k+1) x k
    Eigen::VectorXd last(k + 1);
    last[0] = 1.0;
    for (int j = 0; j < k; ++j) last[j + 1] = series[static_cast<std::size_t>(j)]->at(as_of);
    Eigen::VectorXd pred = beta.transpose() * last;
    std::map<std::string, double> out;
    int j = 0;
    for (const auto& [id, _] : panel) out[id] = pred[j++];
    return out;
}

}  // namespace argo
