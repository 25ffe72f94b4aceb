#include <doctest.h>

#include <cmath>

#include "argo/lasso.hpp"
#include "argo/rng.hpp"
#include "argo/util.hpp"

using namespace argo;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int n, int p) {
    Eigen::MatrixXd x(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
    }
    return x;
}

Eigen::VectorXd random_vector(Rng& rng, int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
}

// Population-standardized column.
Eigen::VectorXd standardized(const Eigen::VectorXd& x) {
    double m = x.mean();
    double sd = std::sqrt((x.array() - m).square().sum() / x.size());
    return (x.array() - m) / sd;
}

double soft(double z, double l) {
    if (z > l) return z - l;
    if (z < -l) return z + l;
    return 0;
}

}  // namespace

TEST_CASE("penalty at or above lambda_max kills every coefficient") {
    Rng rng(1);
    Eigen::MatrixXd x = random_matrix(rng, 30, 5);
    Eigen::VectorXd y = random_vector(rng, 30);
    double lmax = lasso_lambda_max(x, y);
    LassoModel m = lasso_fit(x, y, lmax);
    CHECK(m.coef.isZero(0.0));
    CHECK(m.intercept == doctest::Approx(y.mean()).epsilon(1e-12));
    LassoModel m2 = lasso_fit(x, y, 2 * lmax);
    CHECK(m2.coef.isZero(0.0));
    // Just below lambda_max something survives.
    LassoModel m3 = lasso_fit(x, y, 0.99 * lmax);
    CHECK(m3.coef.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("penalty zero matches normal-equation least squares") {
    Rng rng(2);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd x = random_matrix(rng, 40, 8);
        Eigen::VectorXd beta_true = random_vector(rng, 8);
        Eigen::VectorXd y = x * beta_true + 0.3 * random_vector(rng, 40);
        LassoModel m = lasso_fit(x, y, 0.0);

        Eigen::MatrixXd xi(40, 9);
        xi.col(0).setOnes();
        xi.rightCols(8) = x;
        Eigen::VectorXd ols = (xi.transpose() * xi).ldlt().solve(xi.transpose() * y);
        CHECK(std::abs(m.intercept - ols[0]) < 1e-6);
        for (int j = 0; j < 8; ++j) CHECK(std::abs(m.coef[j] - ols[j + 1]) < 1e-6);
    }
}

TEST_CASE("single standardized column matches the scalar soft-threshold form") {
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        int n = 25;
        Eigen::VectorXd raw = random_vector(rng, n);
        Eigen::MatrixXd x(n, 1);
        x.col(0) = standardized(raw);
        Eigen::VectorXd y = 2.0 * x.col(0) + random_vector(rng, n);
        double lambda = rng.uniform(0.0, 2.5);
        LassoModel m = lasso_fit(x, y, lambda);
        // theta = S(x^T y / n, lambda) / (x^T x / n), with x^T x / n == 1.
        double yc_dot = x.col(0).dot(y - Eigen::VectorXd::Constant(n, y.mean()));
        double expected = soft(yc_dot / n, lambda);
        CHECK(std::abs(m.coef[0] - expected) < 1e-10);
    }
}

TEST_CASE("KKT residuals hold at the tolerance on random instances") {
    Rng rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::MatrixXd x = random_matrix(rng, 40, 8);
        Eigen::VectorXd y = random_vector(rng, 40);
        double lmax = lasso_lambda_max(x, y);
        LassoModel m = lasso_fit(x, y, rng.uniform(0.0, 1.2) * lmax);
        CHECK(m.kkt_residual <= 1e-6);
    }
}

TEST_CASE("zero-variance columns get exactly zero coefficients") {
    Rng rng(5);
    Eigen::MatrixXd x = random_matrix(rng, 30, 4);
    x.col(2).setConstant(3.25);
    Eigen::VectorXd y = random_vector(rng, 30);
    LassoModel m = lasso_fit(x, y, 0.01);
    CHECK(m.coef[2] == 0.0);
    CHECK(m.col_scale[2] == 0.0);
}

TEST_CASE("scale equivariance: scaling y and lambda scales the fit") {
    Rng rng(6);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::MatrixXd x = random_matrix(rng, 35, 6);
        Eigen::VectorXd y = random_vector(rng, 35);
        double lambda = 0.07;
        double c = rng.uniform(0.5, 50.0);
        LassoModel a = lasso_fit(x, y, lambda);
        LassoModel b = lasso_fit(x, c * y, c * lambda);
        CHECK(std::abs(b.intercept - c * a.intercept) <= 1e-9 * std::max(1.0, c));
        for (int j = 0; j < 6; ++j) {
            CHECK(std::abs(b.coef[j] - c * a.coef[j]) <= 1e-9 * std::max(1.0, c));
        }
        Eigen::VectorXd probe = random_vector(rng, 6);
        CHECK(b.predict(probe) == doctest::Approx(c * a.predict(probe)).epsilon(1e-9));
    }
}

TEST_CASE("degenerate designs error") {
    Eigen::MatrixXd x(0, 3);
    Eigen::VectorXd y(0);
    CHECK_THROWS_AS(lasso_fit(x, y, 0.1), Error);
    Eigen::MatrixXd x1(1, 2);
    x1.setOnes();
    Eigen::VectorXd y1(1);
    y1.setOnes();
    CHECK_THROWS_AS(lasso_fit(x1, y1, 0.1), Error);
    Eigen::MatrixXd xn(4, 2);
    xn.setOnes();
    xn(1, 1) = std::nan("");
    Eigen::VectorXd y4 = Eigen::VectorXd::Ones(4);
    CHECK_THROWS_AS(lasso_fit(xn, y4, 0.1), Error);
}

TEST_CASE("cv_select basics") {
    Rng rng(7);
    Eigen::MatrixXd x = random_matrix(rng, 30, 4);
    Eigen::VectorXd y = random_vector(rng, 30);

    CvReport one = cv_select(x, y, {0.25}, 3);
    CHECK(one.chosen == 0.25);
    REQUIRE(one.folds.size() == 3);
    CHECK(one.folds[0].first == 0);
    CHECK(one.folds[2].second == 30);
    // Folds are contiguous and ordered.
    for (int f = 1; f < 3; ++f) CHECK(one.folds[f].first == one.folds[f - 1].second);

    std::vector<double> empty_grid;
    CHECK_THROWS_AS(cv_select(x, y, empty_grid, 3), Error);
    CHECK_THROWS_AS(cv_select(x, y, {0.1}, 1), Error);
}

TEST_CASE("cv_select picks zero penalty for a noiseless linear response") {
    Rng rng(8);
    Eigen::MatrixXd x = random_matrix(rng, 36, 3);
    Eigen::VectorXd beta(3);
    beta << 1.5, -2.0, 0.5;
    Eigen::VectorXd y = x * beta;
    CvReport r = cv_select(x, y, {0.0, 1e6}, 3);
    CHECK(r.chosen == 0.0);
}

TEST_CASE("cv_select matches an independent per-fold grid scan") {
    Rng rng(9);
    Eigen::MatrixXd x = random_matrix(rng, 36, 6);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(6);
    beta[1] = 2.0;
    beta[4] = -1.0;  // planted sparse signal
    Eigen::VectorXd y = x * beta + 0.5 * random_vector(rng, 36);
    std::vector<double> grid{0.001, 0.01, 0.05, 0.2, 1.0};
    const int k = 3;
    CvReport r = cv_select(x, y, grid, k);

    // Oracle: refit each fold independently without warm starts.
    std::vector<double> oracle_mse(grid.size(), 0.0);
    for (int f = 0; f < k; ++f) {
        int fb = 36 * f / k, fe = 36 * (f + 1) / k;
        Eigen::MatrixXd xt(36 - (fe - fb), 6);
        Eigen::VectorXd yt(36 - (fe - fb));
        int r2 = 0;
        for (int i = 0; i < 36; ++i) {
            if (i >= fb && i < fe) continue;
            xt.row(r2) = x.row(i);
            yt[r2] = y[i];
            ++r2;
        }
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            LassoModel m = lasso_fit(xt, yt, grid[gi]);
            double se = 0;
            for (int i = fb; i < fe; ++i) {
                double e = m.predict(x.row(i)) - y[i];
                se += e * e;
            }
            oracle_mse[gi] += se / (fe - fb) / k;
        }
    }
    std::size_t best = 0;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        if (oracle_mse[gi] < oracle_mse[best]) best = gi;
    }
    CHECK(r.chosen == grid[best]);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        CHECK(r.mean_mse[gi] == doctest::Approx(oracle_mse[gi]).epsilon(1e-6));
    }
}

TEST_CASE("objective never increases across sweeps (monotonicity guard active)") {
    Rng rng(10);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd x = random_matrix(rng, 50, 12);
        Eigen::VectorXd y = random_vector(rng, 50);
        // The fit itself throws if a sweep ever increases the objective.
        CHECK_NOTHROW(lasso_fit(x, y, 0.05 * lasso_lambda_max(x, y)));
    }
}

TEST_CASE("duplicate columns stay deterministic") {
    Rng rng(11);
    Eigen::MatrixXd x(30, 2);
    x.col(0) = random_vector(rng, 30);
    x.col(1) = x.col(0);
    Eigen::VectorXd y = 3.0 * x.col(0) + 0.1 * random_vector(rng, 30);
    LassoModel a = lasso_fit(x, y, 0.01);
    LassoModel b = lasso_fit(x, y, 0.01);
    CHECK(a.coef == b.coef);
    CHECK(a.kkt_residual <= 1e-6);
}
