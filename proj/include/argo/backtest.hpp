#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "argo/ensemble.hpp"
#include "argo/metrics.hpp"
#include "argo/national.hpp"
#include "argo/statex.hpp"

namespace argo {

/// Shared state for one bundle/config pair: the lag table, the first-step raw
/// estimator, and per-as-of caches for imputations and national forecasts.
/// All methods are safe to call from the backtest's worker threads.
class Pipeline {
public:
    Pipeline(const DatasetBundle& bundle, const RunConfig& cfg, Date lag_as_of);

    const DatasetBundle& bundle() const { return *bundle_; }
    const RunConfig& cfg() const { return *cfg_; }
    const LagTable& lags() const { return lag_table_; }
    const RawEstimator& raw() const { return raw_; }

    /// Imputation sets for every state plus the nation, as of T.
    std::shared_ptr<const std::map<std::string, ImputationSet>> imputations(Date T) const;

    ForecastTable national_rows(Date T) const;   // argo-joint-*, argo-joint-ili
    ForecastTable disagg_rows(Date T) const;     // argo-national-disagg-*
    ForecastTable argox_rows(Date T) const;      // argox-idv-*
    ForecastTable gt_raw_rows(Date T) const;     // state-gt-raw-*
    ForecastTable naive_rows(Date T) const;      // naive-*, states and nation
    ForecastTable baseline_rows(Date T) const;   // ar3-ili, var1-ili

    /// The four built-ins in selection order; external constituents add on.
    ConstituentRegistry registry() const;

    TruthLookup truth_lookup() const;

private:
    bool wants(Target t) const;

    const DatasetBundle* bundle_;
    const RunConfig* cfg_;
    LagTable lag_table_;
    RawEstimator raw_;
    mutable std::mutex mu_;
    mutable std::map<long, std::shared_ptr<const std::map<std::string, ImputationSet>>>
        imputation_cache_;
    mutable std::map<long, std::shared_ptr<const ForecastTable>> national_cache_;
};

struct BacktestResult {
    ForecastTable forecasts;
    MetricReport report;
    std::vector<SelectionEntry> selections;
};

/// Rolling retrospective run: constituents and baselines for every as-of week
/// in [start-warmup, end], winner-takes-all ensemble and scoring over
/// [start, end]. Deterministic for a fixed seed regardless of thread count.
BacktestResult run_backtest(const DatasetBundle& bundle, const RunConfig& cfg,
                            Date start, Date end,
                            const ConstituentRegistry* registry_override = nullptr);

/// Long-format export `date,geo,method,horizon,value,truth` for plotting.
void write_series_csv(const ForecastTable& t, const DatasetBundle& bundle,
                      const std::string& path);

}  // namespace argo
