#include "argo/statex.hpp"

#include <algorithm>
#include <cmath>

#include "argo/csv.hpp"
#include "argo/lasso.hpp"
#include "argo/national.hpp"

namespace argo {

namespace {

// Weekly aggregate of a term's panel at a level; daily terms sum into weeks.
WeeklySeries weekly_trend(const BundleView& view, const std::string& geo_id,
                          const std::string& term) {
    TrendSeries t = view.trend(geo_id, term);
    if (t.is_daily()) {
        Date anchor = t.daily->start().plus_days(6).next_saturday_on_or_after();
        return aggregate_daily_to_weekly(*t.daily, anchor);
    }
    return *t.weekly;
}

double sample_var(const Eigen::VectorXd& v) {
    const auto n = v.size();
    if (n < 2) return 0.0;
    double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(n - 1);
}

double sample_cov(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const auto n = a.size();
    if (n < 2) return 0.0;
    double ma = a.mean(), mb = b.mean();
    return ((a.array() - ma) * (b.array() - mb)).sum() / static_cast<double>(n - 1);
}

Eigen::MatrixXd sample_cov_matrix(const Eigen::MatrixXd& x) {
    const auto n = x.rows();
    Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    Eigen::MatrixXd c = centered.transpose() * centered / static_cast<double>(n - 1);
    return 0.5 * (c + c.transpose());
}

}  // namespace

RawEstimator::RawEstimator(const DatasetBundle& bundle, const RunConfig& cfg)
    : bundle_(&bundle), cfg_(&cfg) {}

double RawEstimator::estimate(const std::string& geo_id, Target target,
                              Date target_week, int horizon_weeks) const {
    if (horizon_weeks < 1) throw Error("raw estimate: horizon must be >= 1 week");
    const std::tuple<std::string, int, long, int> key{geo_id, static_cast<int>(target),
                                                      target_week.serial(), horizon_weeks};
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }

    // Everything the fit touches ends at target_week - horizon weeks, which
    // makes the estimate independent of the caller's as-of date.
    const Date cutoff = target_week.plus_weeks(-horizon_weeks);
    BundleView v(*bundle_, cutoff);
    const int h = horizon_weeks;

    WeeklySeries y = target == Target::Ili
                         ? v.ili(geo_id)
                         : v.weekly(geo_id, target == Target::Cases ? SignalKind::Cases
                                                                    : SignalKind::Deaths);
    // Search features at the level: weekly flu terms for %ILI, weekly
    // aggregates of the daily COVID terms otherwise.
    std::vector<WeeklySeries> terms;
    for (const std::string& term : v.term_names()) {
        TrendSeries t = v.trend(geo_id, term);
        bool flu_term = !t.is_daily();
        if ((target == Target::Ili) != flu_term) continue;
        terms.push_back(weekly_trend(v, geo_id, term));
    }

    const int train = cfg_->state_train_weeks;
    Date first_resp = cutoff.plus_weeks(-(train - 1));
    if (!y.covers(first_resp.plus_weeks(-h - 1))) {
        throw Error("raw estimate: insufficient weekly history for " + geo_id + " as of " +
                    cutoff.to_string());
    }

    const Eigen::Index p = 2 + static_cast<Eigen::Index>(terms.size());
    Eigen::MatrixXd x(train, p);
    Eigen::VectorXd yy(train);
    auto fill = [&](Eigen::Index row, Date resp, Eigen::VectorXd* pred) {
        Eigen::Index c = 0;
        auto put = [&](double val) {
            if (pred) (*pred)[c] = val;
            else x(row, c) = val;
            ++c;
        };
        put(y.at(resp.plus_weeks(-h)));
        put(y.at(resp.plus_weeks(-h - 1)));
        for (const WeeklySeries& t : terms) {
            Date fd = resp.plus_weeks(-h);
            put(t.covers(fd) ? t.at(fd) : 0.0);
        }
    };
    for (int r = 0; r < train; ++r) {
        Date resp = first_resp.plus_weeks(r);
        yy[r] = y.at(resp);
        fill(r, resp, nullptr);
    }
    std::vector<double> grid = lambda_grid_from_ratios(x, yy, cfg_->lambda_grid);
    double lam = cv_select(x, yy, grid, cfg_->cv_folds).chosen;
    LassoModel m = lasso_fit(x, yy, lam);
    Eigen::VectorXd x_pred(p);
    fill(0, target_week, &x_pred);
    double est = m.predict(x_pred);

    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(key, est);
    return est;
}

void CovarianceSpec::validate() const {
    if (sigma2_zz < 0 || sigma2_ff < 0 || sigma2_reg < 0 || sigma2_nat < 0) {
        throw Error("covariance spec: negative variance");
    }
    if (std::abs(rho) > 1.0 + 1e-12 || std::abs(rho_f) > 1.0 + 1e-12) {
        throw Error("covariance spec: correlation outside [-1, 1]");
    }
    const int m = n_neighbors();
    if (sigma_ff_M.rows() != m || sigma_gt_M.rows() != m) {
        throw Error("covariance spec: block dimension mismatch");
    }
    if (!sigma_zz_M.isApprox(sigma_zz_M.transpose(), 1e-9) ||
        !sigma_ff_M.isApprox(sigma_ff_M.transpose(), 1e-9) ||
        !sigma_gt_M.isApprox(sigma_gt_M.transpose(), 1e-9)) {
        throw Error("covariance spec: blocks must be symmetric");
    }
    if (mu_w.size() != PredictorVector::dimension(m)) {
        throw Error("covariance spec: mu_w dimension mismatch");
    }
}

CovarianceSpec estimate_covariance(const CovarianceWindow& win) {
    const int k = win.weeks();
    const int m = win.n_neighbors();
    if (k < m + 5) {
        throw Error("estimate_covariance: window of " + std::to_string(k) +
                    " weeks is too short for " + std::to_string(m) + " neighbors");
    }
    if (win.target_index < 0 || win.target_index >= m) {
        throw Error("estimate_covariance: bad target index");
    }

    CovarianceSpec s;
    s.mu_z = win.z.mean();
    s.mu_w.resize(PredictorVector::dimension(m));
    s.mu_w[0] = win.z_prev.mean();
    for (int j = 0; j < m; ++j) s.mu_w[1 + j] = win.gt_dev.col(j).mean();
    s.mu_w[1 + m] = win.reg_dev.mean();
    s.mu_w[2 + m] = win.nat_dev.mean();
    for (int j = 0; j < m; ++j) s.mu_w[3 + m + j] = win.cross_lagged.col(j).mean();

    s.sigma2_zz = sample_var(win.z);
    // Lag-1 autocorrelation; constant series give 0 by convention.
    double vz = s.sigma2_zz, vp = sample_var(win.z_prev);
    if (vz > 0 && vp > 0) {
        s.rho = std::clamp(sample_cov(win.z, win.z_prev) / std::sqrt(vz * vp), -1.0, 1.0);
    }
    Eigen::VectorXd cross_t = win.cross_current.col(win.target_index);
    s.sigma2_ff = sample_var(cross_t);
    s.sigma2_zf = sample_cov(win.z, cross_t);
    double denom = std::sqrt(std::max(vz, 0.0) * std::max(s.sigma2_ff, 0.0));
    if (std::abs(s.sigma2_zf) > 1e-12 * std::max(1.0, denom) && denom > 0) {
        s.rho_f = std::clamp(
            sample_cov(win.z, win.cross_lagged.col(win.target_index)) / s.sigma2_zf,
            -1.0, 1.0);
    }
    s.sigma_zz_M = sample_cov_matrix(win.z_neighbors);
    s.sigma_ff_M = sample_cov_matrix(win.cross_lagged);
    s.sigma_gt_M = sample_cov_matrix(win.gt_dev - win.z_neighbors);
    s.sigma2_reg = sample_var(win.reg_dev - win.z_reg);
    s.sigma2_nat = sample_var(win.nat_dev - win.z_nat);
    s.validate();
    return s;
}

SigmaParts assemble_sigma(const CovarianceSpec& spec) {
    spec.validate();
    const int m = spec.n_neighbors();
    const int dim = PredictorVector::dimension(m);
    const double zz = spec.sigma2_zz;
    const double rzz = spec.rho * zz;
    const double zf = spec.sigma2_zf;
    const double rzf = spec.rho_f * zf;
    const int kReg = 1 + m, kNat = 2 + m, kIli = 3 + m;

    SigmaParts p;
    p.zw.resize(dim);
    p.zw[0] = rzz;
    for (int j = 0; j < m; ++j) p.zw[1 + j] = zz;
    p.zw[kReg] = zz;
    p.zw[kNat] = zz;
    for (int j = 0; j < m; ++j) p.zw[kIli + j] = rzf;

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim);
    w(0, 0) = zz;
    for (int j = 0; j < m; ++j) w(0, 1 + j) = rzz;
    w(0, kReg) = rzz;
    w(0, kNat) = rzz;
    for (int j = 0; j < m; ++j) w(0, kIli + j) = zf;
    w.block(1, 1, m, m) = spec.sigma_zz_M + spec.sigma_gt_M;
    for (int j = 0; j < m; ++j) {
        w(1 + j, kReg) = zz;
        w(1 + j, kNat) = zz;
        for (int j2 = 0; j2 < m; ++j2) w(1 + j, kIli + j2) = rzf;
    }
    w(kReg, kReg) = zz + spec.sigma2_reg;
    w(kReg, kNat) = zz;
    for (int j = 0; j < m; ++j) w(kReg, kIli + j) = rzf;
    w(kNat, kNat) = zz + spec.sigma2_nat;
    for (int j = 0; j < m; ++j) w(kNat, kIli + j) = rzf;
    w.block(kIli, kIli, m, m) = spec.sigma_ff_M;
    // Mirror the upper triangle.
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) w(j, i) = w(i, j);
    }
    p.ww = std::move(w);
    p.d_ww = p.ww.diagonal();
    return p;
}

double shrinkage_predict(double mu_z, const Eigen::VectorXd& mu_w,
                         const Eigen::RowVectorXd& sigma_zw, const Eigen::MatrixXd& sigma_ww,
                         const Eigen::VectorXd& d_ww, const Eigen::VectorXd& w) {
    const auto dim = sigma_ww.rows();
    if (sigma_zw.cols() != dim || d_ww.size() != dim || w.size() != dim ||
        mu_w.size() != dim) {
        throw Error("shrinkage_predict: dimension mismatch");
    }
    // Zero coupling predicts the mean regardless of the matrix condition.
    if (sigma_zw.isZero(0.0)) return mu_z;
    Eigen::MatrixXd blend = 0.5 * sigma_ww;
    blend.diagonal() += 0.5 * d_ww;
    const double scale = blend.trace() / static_cast<double>(dim);
    if (!(scale > 0.0)) {
        throw Error("shrinkage_predict: blended covariance has no variance");
    }
    const Eigen::VectorXd rhs = w - mu_w;
    for (double eps : {0.0, 1e-10, 1e-8, 1e-6}) {
        Eigen::MatrixXd a = blend;
        a.diagonal().array() += eps * scale;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        if (ldlt.info() != Eigen::Success) continue;
        Eigen::VectorXd x = ldlt.solve(rhs);
        double resid = (a * x - rhs).norm();
        if (resid <= 1e-8 * std::max(1.0, rhs.norm()) && x.allFinite()) {
            return mu_z + 0.5 * sigma_zw.dot(x);
        }
    }
    throw Error("shrinkage_predict: blended covariance is singular");
}

namespace {

struct LevelSheet {
    // Levels per state id; region/nation levels derive from the states.
    std::map<std::string, double> state;

    double aggregate(const std::vector<std::string>& members, bool mean) const {
        double sum = 0.0;
        for (const std::string& m : members) sum += state.at(m);
        return mean ? sum / static_cast<double>(members.size()) : sum;
    }
};

}  // namespace

ForecastTable forecast_state(const BundleView& view, const RawEstimator& raw,
                             const std::map<std::string, ImputationSet>& imputations,
                             const RunConfig& cfg, Date as_of, Target target,
                             std::map<std::string, CovarianceSpec>* cov_out) {
    const bool is_ili = target == Target::Ili;
    const SignalKind kind = target == Target::Cases ? SignalKind::Cases : SignalKind::Deaths;
    const std::vector<std::string> states = view.state_ids();
    const std::string nation = view.nation_id();
    const Date T = as_of;
    const int K = cfg.state_train_weeks;
    std::vector<int> horizons = is_ili ? std::vector<int>{1} : cfg.horizons;
    std::sort(horizons.begin(), horizons.end());

    // Weekly level series per geography, and per-state cross-disease series.
    std::map<std::string, WeeklySeries> level_series;  // states, regions, nation
    auto level_of = [&](const std::string& g) -> const WeeklySeries& {
        auto it = level_series.find(g);
        if (it != level_series.end()) return it->second;
        WeeklySeries s = is_ili ? view.ili(g) : view.weekly(g, kind);
        return level_series.emplace(g, std::move(s)).first->second;
    };

    // For COVID targets the cross-disease series per draw is the weekly
    // aggregate of that draw's imputed daily ILI (equal to the published
    // weekly ILI by mass conservation). For %ILI the cross series is the
    // weekly COVID case count and there is no imputation loop.
    const int n_draws = is_ili ? 1 : cfg.imputation_draws;
    std::map<std::string, std::vector<WeeklySeries>> cross_by_state;
    for (const std::string& m : states) {
        std::vector<WeeklySeries> per_draw;
        if (is_ili) {
            per_draw.push_back(view.weekly(m, SignalKind::Cases));
        } else {
            auto it = imputations.find(m);
            if (it == imputations.end()) {
                throw Error("forecast_state: no imputation set for state " + m);
            }
            for (int n = 0; n < n_draws; ++n) {
                per_draw.push_back(weekly_view(it->second, static_cast<std::size_t>(n)));
            }
        }
        cross_by_state.emplace(m, std::move(per_draw));
    }

    struct StateBlock {
        std::vector<std::string> neighbors;
        int target_index = 0;
        std::string region;
        // Draw-invariant covariance window parts, per horizon index.
        std::vector<CovarianceWindow> window;
        // Raw estimates for the prediction week, per horizon index.
        std::vector<std::vector<double>> gt_raw_pred;  // [h][neighbor]
        std::vector<double> reg_raw_pred, nat_raw_pred;
    };

    std::map<std::string, StateBlock> blocks;
    for (const std::string& m : states) {
        StateBlock blk;
        blk.neighbors = view.neighbors_of(m);
        blk.region = *view.geo(m).region_of;
        auto self = std::find(blk.neighbors.begin(), blk.neighbors.end(), m);
        if (self == blk.neighbors.end()) throw Error("state " + m + " missing from its region");
        blk.target_index = static_cast<int>(self - blk.neighbors.begin());
        const int nm = static_cast<int>(blk.neighbors.size());

        for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
            int h = horizons[hi];
            CovarianceWindow win;
            win.target_index = blk.target_index;
            win.z.resize(K);
            win.z_prev.resize(K);
            win.gt_dev.resize(K, nm);
            win.z_neighbors.resize(K, nm);
            win.reg_dev.resize(K);
            win.nat_dev.resize(K);
            win.z_reg.resize(K);
            win.z_nat.resize(K);
            win.cross_lagged.resize(K, nm);
            win.cross_current.resize(K, nm);
            const WeeklySeries& ym = level_of(m);
            const WeeklySeries& yreg = level_of(blk.region);
            const WeeklySeries& ynat = level_of(nation);
            for (int k = 0; k < K; ++k) {
                Date w = T.plus_weeks(-(K - 1) + k);
                win.z[k] = ym.at(w) - ym.at(w.plus_weeks(-1));
                win.z_prev[k] = ym.at(w.plus_weeks(-1)) - ym.at(w.plus_weeks(-2));
                for (int j = 0; j < nm; ++j) {
                    const WeeklySeries& yj = level_of(blk.neighbors[static_cast<std::size_t>(j)]);
                    win.gt_dev(k, j) =
                        raw.estimate(blk.neighbors[static_cast<std::size_t>(j)], target, w, h) -
                        yj.at(w.plus_weeks(-1));
                    win.z_neighbors(k, j) = yj.at(w) - yj.at(w.plus_weeks(-1));
                }
                win.reg_dev[k] = raw.estimate(blk.region, target, w, h) -
                                 yreg.at(w.plus_weeks(-1));
                win.nat_dev[k] = raw.estimate(nation, target, w, h) -
                                 ynat.at(w.plus_weeks(-1));
                win.z_reg[k] = yreg.at(w) - yreg.at(w.plus_weeks(-1));
                win.z_nat[k] = ynat.at(w) - ynat.at(w.plus_weeks(-1));
            }
            blk.window.push_back(std::move(win));

            std::vector<double> gt_pred;
            Date tau = T.plus_weeks(h);
            for (int j = 0; j < nm; ++j) {
                gt_pred.push_back(
                    raw.estimate(blk.neighbors[static_cast<std::size_t>(j)], target, tau, h));
            }
            blk.gt_raw_pred.push_back(std::move(gt_pred));
            blk.reg_raw_pred.push_back(raw.estimate(blk.region, target, tau, h));
            blk.nat_raw_pred.push_back(raw.estimate(nation, target, tau, h));
        }
        blocks.emplace(m, std::move(blk));
    }

    // Cross-disease increments available at prediction time: the latest
    // observed increment, identical for every horizon.
    auto cross_increment = [&](const std::string& st, int draw, Date week) {
        const WeeklySeries& xs = cross_by_state.at(st)[static_cast<std::size_t>(draw)];
        return xs.at(week) - xs.at(week.plus_weeks(-1));
    };

    // Predicted levels per draw, iterated across horizons.
    std::map<std::string, std::vector<std::vector<double>>> level_samples;
    for (const std::string& m : states) {
        level_samples[m].assign(horizons.size(), {});
    }
    std::map<std::string, CovarianceSpec> first_draw_specs;

    for (int n = 0; n < n_draws; ++n) {
        LevelSheet prev, prev2;
        for (const std::string& m : states) {
            const WeeklySeries& ym = level_of(m);
            prev.state[m] = ym.at(T);
            prev2.state[m] = ym.at(T.plus_weeks(-1));
        }
        for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
            const int h = horizons[hi];
            LevelSheet next;
            for (const std::string& m : states) {
                StateBlock& blk = blocks.at(m);
                const int nm = static_cast<int>(blk.neighbors.size());
                CovarianceWindow& win = blk.window[hi];
                for (int k = 0; k < K; ++k) {
                    Date w = T.plus_weeks(-(K - 1) + k);
                    for (int j = 0; j < nm; ++j) {
                        const std::string& st = blk.neighbors[static_cast<std::size_t>(j)];
                        win.cross_lagged(k, j) =
                            cross_increment(st, n, w.plus_weeks(-h));
                        win.cross_current(k, j) = cross_increment(st, n, w);
                    }
                }
                CovarianceSpec spec = estimate_covariance(win);
                if (n == 0 && h == horizons.front()) first_draw_specs.emplace(m, spec);
                SigmaParts sig = assemble_sigma(spec);

                Eigen::VectorXd w_pred(PredictorVector::dimension(nm));
                w_pred[0] = prev.state.at(m) - prev2.state.at(m);
                for (int j = 0; j < nm; ++j) {
                    const std::string& st = blk.neighbors[static_cast<std::size_t>(j)];
                    w_pred[1 + j] = blk.gt_raw_pred[hi][static_cast<std::size_t>(j)] -
                                    prev.state.at(st);
                }
                {
                    std::vector<std::string> members;
                    for (const std::string& st : states) {
                        if (*view.geo(st).region_of == blk.region) members.push_back(st);
                    }
                    double reg_prev = h == 1 ? level_of(blk.region).at(T)
                                             : prev.aggregate(members, is_ili);
                    double nat_prev = h == 1 ? level_of(nation).at(T)
                                             : prev.aggregate(states, is_ili);
                    w_pred[1 + nm] = blk.reg_raw_pred[hi] - reg_prev;
                    w_pred[2 + nm] = blk.nat_raw_pred[hi] - nat_prev;
                }
                for (int j = 0; j < nm; ++j) {
                    const std::string& st = blk.neighbors[static_cast<std::size_t>(j)];
                    w_pred[3 + nm + j] = cross_increment(st, n, T);
                }

                double z_hat = shrinkage_predict(spec.mu_z, spec.mu_w, sig.zw, sig.ww,
                                                 sig.d_ww, w_pred);
                next.state[m] = prev.state.at(m) + z_hat;
            }
            for (const std::string& m : states) {
                level_samples[m][hi].push_back(next.state.at(m));
            }
            prev2 = prev;
            prev = next;
        }
    }

    ForecastTable out;
    const std::string method = method_name("argox-idv", target);
    for (const std::string& m : states) {
        for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
            double v = median(level_samples[m][hi]);
            out.add({m, T.plus_weeks(horizons[hi]), horizons[hi], method,
                     std::max(0.0, v)});
        }
    }
    if (cov_out) *cov_out = std::move(first_draw_specs);
    return out;
}

ForecastTable forecast_state_gt_raw(const BundleView& view, const RawEstimator& raw,
                                    const RunConfig& cfg, Date as_of, Target target) {
    std::vector<int> horizons = target == Target::Ili ? std::vector<int>{1} : cfg.horizons;
    ForecastTable out;
    const std::string method = method_name("state-gt-raw", target);
    for (const std::string& m : view.state_ids()) {
        for (int h : horizons) {
            double v = raw.estimate(m, target, as_of.plus_weeks(h), h);
            out.add({m, as_of.plus_weeks(h), h, method, std::max(0.0, v)});
        }
    }
    return out;
}

void write_covariance_csv(const std::map<std::string, CovarianceSpec>& specs,
                          const std::string& path) {
    CsvWriter w(path, {"geo", "parameter", "row", "col", "value"});
    for (const auto& [geo, s] : specs) {
        auto scalar = [&](const char* name, double v) {
            w.row({geo, name, "0", "0", format_double(v)});
        };
        scalar("sigma2_zz", s.sigma2_zz);
        scalar("rho", s.rho);
        scalar("sigma2_ff", s.sigma2_ff);
        scalar("sigma2_zf", s.sigma2_zf);
        scalar("rho_f", s.rho_f);
        scalar("sigma2_reg", s.sigma2_reg);
        scalar("sigma2_nat", s.sigma2_nat);
        scalar("mu_z", s.mu_z);
        for (Eigen::Index i = 0; i < s.mu_w.size(); ++i) {
            w.row({geo, "mu_w", std::to_string(i), "0", format_double(s.mu_w[i])});
        }
        auto block = [&](const char* name, const Eigen::MatrixXd& b) {
            for (Eigen::Index i = 0; i < b.rows(); ++i) {
                for (Eigen::Index j = 0; j < b.cols(); ++j) {
                    w.row({geo, name, std::to_string(i), std::to_string(j),
                           format_double(b(i, j))});
                }
            }
        };
        block("sigma_zz_M", s.sigma_zz_M);
        block("sigma_ff_M", s.sigma_ff_M);
        block("sigma_gt_M", s.sigma_gt_M);
    }
    w.close();
}

}  // namespace argo
