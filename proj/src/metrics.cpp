#include "argo/metrics.hpp"

#include <cmath>

#include "argo/csv.hpp"

namespace argo {

namespace {

void check_lengths(const std::vector<double>& a, const std::vector<double>& b,
                   std::size_t min_len) {
    if (a.size() != b.size()) throw Error("metric: length mismatch");
    if (a.size() < min_len) throw Error("metric: need at least " +
                                        std::to_string(min_len) + " points");
}

}  // namespace

double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
    check_lengths(pred, truth, 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - truth[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
    check_lengths(pred, truth, 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
    return acc / static_cast<double>(pred.size());
}

std::optional<double> pearson(const std::vector<double>& pred,
                              const std::vector<double>& truth) {
    check_lengths(pred, truth, 2);
    const double n = static_cast<double>(pred.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        ma += pred[i];
        mb += truth[i];
    }
    ma /= n;
    mb /= n;
    double va = 0.0, vb = 0.0, cab = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double da = pred[i] - ma, db = truth[i] - mb;
        va += da * da;
        vb += db * db;
        cab += da * db;
    }
    if (va <= 0.0 || vb <= 0.0) return std::nullopt;
    // r as sign(c)*sqrt(c^2/(va*vb)): identical rounding in numerator and
    // denominator makes the self-correlation exactly 1, and |r| clamps to 1.
    double ratio = (cab * cab) / (va * vb);
    double r = std::sqrt(std::min(ratio, 1.0));
    return cab < 0.0 ? -r : r;
}

void write_metrics_csv(const MetricReport& report, const std::string& path) {
    CsvWriter w(path, {"geo", "method", "horizon", "rmse", "mae", "corr", "n"});
    for (const MetricRow& r : report.rows) {
        w.row({r.geo, r.method, std::to_string(r.horizon), format_double(r.rmse_v),
               format_double(r.mae_v), r.corr ? format_double(*r.corr) : "",
               std::to_string(r.n)});
    }
    w.close();
}

}  // namespace argo
