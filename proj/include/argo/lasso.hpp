#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace argo {

/// L1-penalized least squares fit. The solver standardizes columns to zero
/// mean / unit variance and rescales the response internally; reported
/// coefficients are on the original scale and the intercept is unpenalized.
struct LassoModel {
    double intercept = 0.0;
    Eigen::VectorXd coef;                 // original scale, one per column
    std::vector<std::string> names;       // column names (may be empty)
    double lambda = 0.0;
    Eigen::VectorXd col_mean, col_scale;  // scale == 0 marks zero-variance columns
    double objective = 0.0;               // (1/2n)||y - mu - X theta||^2 + lambda*||theta_std||_1
    double kkt_residual = 0.0;            // on the standardized/scaled problem
    int sweeps = 0;

    double predict(const Eigen::VectorXd& x) const {
        return intercept + coef.dot(x);
    }
};

struct LassoOptions {
    double tol = 1e-8;        // max coefficient change per sweep
    int max_sweeps = 100000;
    double kkt_tol = 1e-6;
    /// Optional warm start: standardized coefficients of a previous fit.
    const Eigen::VectorXd* warm_start = nullptr;
};

/// Minimizes (1/2n)||y - mu - X theta||^2 + lambda ||theta||_1 after column
/// standardization, by cyclic coordinate descent. The objective never
/// increases across a sweep and KKT conditions hold at the returned model.
LassoModel lasso_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                     std::vector<std::string> names = {}, const LassoOptions& opt = {});

/// Smallest penalty that zeroes every coefficient: max_j |x_j^T (y - ybar)| / n
/// on standardized columns.
double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct CvReport {
    std::vector<double> lambdas;    // as given
    std::vector<double> mean_mse;   // aligned with lambdas
    double chosen = 0.0;
    std::vector<std::pair<int, int>> folds;  // [begin, end) row ranges, in time order
};

/// Cross-validation over contiguous time-ordered folds (no shuffling). Ties
/// break toward the larger lambda, i.e. the sparser model.
CvReport cv_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const std::vector<double>& lambda_grid, int k_folds,
                   const LassoOptions& opt = {});

/// Absolute penalties from grid ratios: ratio * lambda_max, deduplicated.
std::vector<double> lambda_grid_from_ratios(const Eigen::MatrixXd& X,
                                            const Eigen::VectorXd& y,
                                            const std::vector<double>& ratios);

}  // namespace argo
