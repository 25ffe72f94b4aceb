#include "argo/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "argo/util.hpp"

namespace argo {

namespace {

inline double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

struct Standardized {
    Eigen::MatrixXd x;        // active columns only, mean 0, population sd 1
    Eigen::VectorXd y;        // centered, divided by y_scale
    std::vector<int> active;  // original column index per active column
    Eigen::VectorXd mean, scale;  // per original column; scale = 0 if dropped
    double y_mean = 0.0, y_scale = 1.0;
};

Standardized standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const auto n = X.rows();
    const auto p = X.cols();
    if (n == 0) throw Error("lasso: design has zero rows");
    if (n != y.size()) throw Error("lasso: rows(X) != len(y)");
    if (n < 2) throw Error("lasso: need at least 2 rows");
    if (!X.allFinite() || !y.allFinite()) throw Error("lasso: non-finite entries");

    Standardized s;
    s.mean = X.colwise().mean();
    s.scale = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double sd = std::sqrt((X.col(j).array() - s.mean[j]).square().sum() /
                              static_cast<double>(n));
        // Zero-variance columns get coefficient exactly 0 and leave the fit.
        if (sd > 1e-10 * std::max(1.0, std::abs(s.mean[j]))) {
            s.scale[j] = sd;
            s.active.push_back(static_cast<int>(j));
        }
    }
    s.x.resize(n, static_cast<Eigen::Index>(s.active.size()));
    for (std::size_t k = 0; k < s.active.size(); ++k) {
        int j = s.active[k];
        s.x.col(static_cast<Eigen::Index>(k)) =
            (X.col(j).array() - s.mean[j]) / s.scale[j];
    }
    s.y_mean = y.mean();
    Eigen::VectorXd yc = y.array() - s.y_mean;
    double ysd = std::sqrt(yc.squaredNorm() / static_cast<double>(n));
    s.y_scale = ysd > 0.0 ? ysd : 1.0;
    s.y = yc / s.y_scale;
    return s;
}

}  // namespace

double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Standardized s = standardize(X, y);
    if (s.active.empty()) return 0.0;
    const double n = static_cast<double>(X.rows());
    // On the original y scale.
    return (s.x.transpose() * (s.y * s.y_scale)).cwiseAbs().maxCoeff() / n;
}

LassoModel lasso_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                     std::vector<std::string> names, const LassoOptions& opt) {
    if (!(lambda >= 0.0)) throw Error("lasso: lambda must be >= 0");
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != X.cols()) {
        throw Error("lasso: names size mismatch");
    }
    Standardized s = standardize(X, y);
    const double n = static_cast<double>(X.rows());
    const Eigen::Index pa = s.x.cols();
    const double lam = lambda / s.y_scale;  // penalty on the unit-scale problem

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(pa);
    if (opt.warm_start && opt.warm_start->size() == pa) beta = *opt.warm_start;
    Eigen::VectorXd residual = s.y - s.x * beta;

    auto objective = [&]() {
        return residual.squaredNorm() / (2.0 * n) + lam * beta.lpNorm<1>();
    };
    auto kkt = [&]() {
        double worst = 0.0;
        for (Eigen::Index j = 0; j < pa; ++j) {
            double grad = -s.x.col(j).dot(residual) / n;
            double v = beta[j] != 0.0
                           ? std::abs(grad + lam * (beta[j] > 0 ? 1.0 : -1.0))
                           : std::max(0.0, std::abs(grad) - lam);
            worst = std::max(worst, v);
        }
        return worst;
    };

    int sweeps = 0;
    double prev_obj = objective();
    while (sweeps < opt.max_sweeps) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < pa; ++j) {
            // Unit-variance columns: x_j^T x_j / n == 1.
            double z = s.x.col(j).dot(residual) / n + beta[j];
            double bj = soft_threshold(z, lam);
            double delta = bj - beta[j];
            if (delta != 0.0) {
                residual -= delta * s.x.col(j);
                beta[j] = bj;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        ++sweeps;
        double obj = objective();
        if (obj > prev_obj + 1e-10 * std::max(1.0, std::abs(prev_obj))) {
            throw Error("lasso: objective increased within a sweep");
        }
        prev_obj = obj;
        if (max_delta < opt.tol && kkt() <= opt.kkt_tol) break;
    }

    LassoModel m;
    m.lambda = lambda;
    m.names = std::move(names);
    m.col_mean = s.mean;
    m.col_scale = s.scale;
    m.sweeps = sweeps;
    m.kkt_residual = kkt();
    m.coef = Eigen::VectorXd::Zero(X.cols());
    for (Eigen::Index k = 0; k < pa; ++k) {
        int j = s.active[static_cast<std::size_t>(k)];
        m.coef[j] = beta[k] * s.y_scale / s.scale[j];
    }
    m.intercept = s.y_mean - m.coef.dot(s.mean);
    // Objective in original y units with the standardized-coefficient penalty.
    double rss = (y.array() - m.intercept - (X * m.coef).array()).square().sum();
    m.objective = rss / (2.0 * n) + lambda * (beta * s.y_scale).lpNorm<1>();
    if (!std::isfinite(m.objective)) throw Error("lasso: non-finite objective");
    return m;
}

CvReport cv_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const std::vector<double>& lambda_grid, int k_folds,
                   const LassoOptions& opt) {
    if (lambda_grid.empty()) throw Error("cv_select: empty lambda grid");
    if (k_folds < 2) throw Error("cv_select: need at least 2 folds");
    const Eigen::Index n = X.rows();
    if (n < 2 * k_folds) throw Error("cv_select: not enough rows for " +
                                     std::to_string(k_folds) + " folds");

    CvReport report;
    report.lambdas = lambda_grid;
    report.mean_mse.assign(lambda_grid.size(), 0.0);

    std::vector<std::pair<int, int>> folds;
    for (int f = 0; f < k_folds; ++f) {
        int b = static_cast<int>(n) * f / k_folds;
        int e = static_cast<int>(n) * (f + 1) / k_folds;
        folds.emplace_back(b, e);
    }
    report.folds = folds;

    // Largest penalty first so each fit warm-starts the next.
    std::vector<std::size_t> order(lambda_grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return lambda_grid[a] > lambda_grid[b];
    });

    for (const auto& [fb, fe] : folds) {
        Eigen::Index train_n = n - (fe - fb);
        Eigen::MatrixXd Xt(train_n, X.cols());
        Eigen::VectorXd yt(train_n);
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i >= fb && i < fe) continue;
            Xt.row(r) = X.row(i);
            yt[r] = y[i];
            ++r;
        }
        Eigen::VectorXd warm;
        for (std::size_t oi : order) {
            LassoOptions o = opt;
            o.warm_start = warm.size() ? &warm : nullptr;
            LassoModel m = lasso_fit(Xt, yt, lambda_grid[oi], {}, o);
            // Carry the standardized coefficients forward along the path.
            warm.resize(0);
            {
                Eigen::VectorXd std_beta(m.coef.size());
                Eigen::Index pa = 0;
                for (Eigen::Index j = 0; j < m.coef.size(); ++j) {
                    if (m.col_scale[j] > 0.0) std_beta[pa++] = m.coef[j] * m.col_scale[j];
                }
                // Re-expressed on the unit y scale inside the next fit; the
                // next standardization recomputes scaling, so only reuse when
                // shapes match (same train matrix across the grid: they do).
                double ysd = std::sqrt((yt.array() - yt.mean()).square().sum() /
                                       static_cast<double>(train_n));
                if (ysd <= 0.0) ysd = 1.0;
                warm = std_beta.head(pa) / ysd;
            }
            double se = 0.0;
            for (int i = fb; i < fe; ++i) {
                double pred = m.predict(X.row(i));
                double err = pred - y[i];
                se += err * err;
            }
            report.mean_mse[oi] += se / static_cast<double>(fe - fb) /
                                   static_cast<double>(k_folds);
        }
    }

    // Argmin with ties toward the larger lambda.
    std::size_t best = order.front();
    for (std::size_t oi : order) {
        if (report.mean_mse[oi] < report.mean_mse[best]) best = oi;
    }
    report.chosen = lambda_grid[best];
    return report;
}

std::vector<double> lambda_grid_from_ratios(const Eigen::MatrixXd& X,
                                            const Eigen::VectorXd& y,
                                            const std::vector<double>& ratios) {
    double lmax = lasso_lambda_max(X, y);
    std::vector<double> grid;
    for (double r : ratios) grid.push_back(r * lmax);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

}  // namespace argo
