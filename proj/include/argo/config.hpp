#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "argo/date.hpp"

namespace argo {

struct TermLags {
    int case_lag = 1;   // days
    int death_lag = 1;  // days
};

/// Per-term optimal search lags. Serialized as `term,case_lag,death_lag`.
struct LagTable {
    std::map<std::string, TermLags> terms;

    static LagTable load_csv(const std::string& path);
    void save_csv(const std::string& path) const;
    /// The 23 shipped default terms with their optimal case/death lags.
    static LagTable builtin_default();
};

enum class Target { Cases, Deaths, Ili };
std::string target_name(Target t);
Target parse_target(const std::string& s);

struct RunConfig {
    std::vector<int> horizons = {1, 2, 3, 4};  // weeks ahead (COVID); ILI is 1
    std::vector<Target> targets = {Target::Cases, Target::Deaths, Target::Ili};
    int imputation_draws = 100;
    int national_train_days = 56;
    int state_train_weeks = 30;
    int ensemble_window_weeks = 15;
    int ili_train_weeks = 52;
    int ili_ar_lags = 13;        // weekly autoregressive lags in the %ILI design
    int cv_folds = 3;
    // Ratios of lambda_max applied per fit; ascending.
    std::vector<double> lambda_grid = {0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0};
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = logical cores

    // Imputation donor pool: weeks {first_eligible .. tau} when inclusive,
    // {first_eligible .. tau-1} otherwise.
    bool donor_include_current = true;
    std::optional<Date> first_eligible_week;

    // Window over which per-term optimal lags are selected when no lag table
    // file is given.
    std::optional<Date> lag_window_start;
    std::optional<Date> lag_window_end;
    std::vector<int> lag_candidates_from_to = {1, 35};  // inclusive day range

    // Data files.
    std::string cases_csv;
    std::string ili_csv;
    std::string trends_csv;
    std::string geography_csv;  // optional; built-in US map used when empty
    std::string lag_table_csv;  // optional; selected from data when empty

    void validate() const;

    /// Flat key/value JSON; unknown keys rejected. CLI flags override after.
    static RunConfig load_json(const std::string& path);
    std::string to_json() const;
    std::uint64_t config_hash() const;
};

}  // namespace argo
