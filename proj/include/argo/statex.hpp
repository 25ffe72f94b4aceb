#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "argo/forecast_table.hpp"
#include "argo/imputation.hpp"

namespace argo {

/// First-step raw estimates: search-plus-AR weekly regressions at state,
/// region, or national resolution. The estimate for a target week uses only
/// data through `horizon` weeks before it, so a given (geo, week, horizon)
/// value is independent of the as-of date that requested it.
class RawEstimator {
public:
    RawEstimator(const DatasetBundle& bundle, const RunConfig& cfg);

    double estimate(const std::string& geo_id, Target target, Date target_week,
                    int horizon_weeks) const;

private:
    const DatasetBundle* bundle_;
    const RunConfig* cfg_;
    mutable std::mutex mu_;
    mutable std::map<std::tuple<std::string, int, long, int>, double> cache_;
};

/// Ordered predictor vector for one state and week:
///   [ Z_prev | GT deviations over neighbors | reg | nat | cross-disease
///     increments over neighbors ], length 2|M| + 3.
struct PredictorVector {
    Eigen::VectorXd w;
    int n_neighbors = 0;

    static int dimension(int n_neighbors) { return 2 * n_neighbors + 3; }
};

/// Scalar/block parameters from which the structured covariance matrices are
/// assembled.
struct CovarianceSpec {
    double sigma2_zz = 0.0;
    double rho = 0.0;
    double sigma2_ff = 0.0;
    double sigma2_zf = 0.0;
    double rho_f = 0.0;
    Eigen::MatrixXd sigma_zz_M;  // var of neighbor target increments
    Eigen::MatrixXd sigma_ff_M;  // var of neighbor cross-disease increments
    Eigen::MatrixXd sigma_gt_M;  // var of GT estimation errors
    double sigma2_reg = 0.0;
    double sigma2_nat = 0.0;
    double mu_z = 0.0;
    Eigen::VectorXd mu_w;

    int n_neighbors() const { return static_cast<int>(sigma_zz_M.rows()); }
    void validate() const;
};

/// Aligned training window for one (state, horizon): every column spans the
/// same weeks. `target_index` locates the state inside the neighbor ordering.
struct CovarianceWindow {
    Eigen::VectorXd z;            // Z_tau, target state
    Eigen::VectorXd z_prev;       // Z_{tau-1} (first W component)
    Eigen::MatrixXd gt_dev;       // K x M: gt estimate minus previous level
    Eigen::MatrixXd z_neighbors;  // K x M: Z_tau per neighbor
    Eigen::VectorXd reg_dev, nat_dev;  // W components at region/nation
    Eigen::VectorXd z_reg, z_nat;      // region/nation increments
    Eigen::MatrixXd cross_lagged;      // K x M: cross-disease increments as in W
    Eigen::MatrixXd cross_current;     // K x M: contemporaneous with z
    int target_index = 0;

    int weeks() const { return static_cast<int>(z.size()); }
    int n_neighbors() const { return static_cast<int>(gt_dev.cols()); }
};

/// Sample moments under the stationarity assumptions; degenerate variances
/// give correlation 0 by convention and blocks are symmetrized.
CovarianceSpec estimate_covariance(const CovarianceWindow& win);

struct SigmaParts {
    Eigen::RowVectorXd zw;  // 1 x (2M+3)
    Eigen::MatrixXd ww;     // (2M+3) x (2M+3), symmetric by construction
    Eigen::VectorXd d_ww;   // diagonal of ww
};

/// Expands the printed block pattern to the neighbor-indexed dimensions.
SigmaParts assemble_sigma(const CovarianceSpec& spec);

/// Zhat = mu_z + 1/2 Sigma_zw (1/2 Sigma_ww + 1/2 D_ww)^{-1} (w - mu_w), with
/// escalating jitter {0, 1e-10, 1e-8, 1e-6} * trace/dim before failing.
double shrinkage_predict(double mu_z, const Eigen::VectorXd& mu_w,
                         const Eigen::RowVectorXd& sigma_zw, const Eigen::MatrixXd& sigma_ww,
                         const Eigen::VectorXd& d_ww, const Eigen::VectorXd& w);

/// ARGOX state-by-state second step for every state in the view, horizons
/// taken from cfg (ILI: horizon 1 only, single deterministic pass). Per-state
/// covariance dumps are optional.
ForecastTable forecast_state(const BundleView& view, const RawEstimator& raw,
                             const std::map<std::string, ImputationSet>& imputations,
                             const RunConfig& cfg, Date as_of, Target target,
                             std::map<std::string, CovarianceSpec>* cov_out = nullptr);

/// First-step state estimates exposed directly as a constituent.
ForecastTable forecast_state_gt_raw(const BundleView& view, const RawEstimator& raw,
                                    const RunConfig& cfg, Date as_of, Target target);

void write_covariance_csv(const std::map<std::string, CovarianceSpec>& specs,
                          const std::string& path);

}  // namespace argo
