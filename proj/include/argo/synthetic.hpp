#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "argo/bundle.hpp"

namespace argo {

/// Twin-epidemic scenario with planted structure: each search term leads
/// cases by a known number of days, weekly ILI is coupled to weekly cases,
/// and daily counts carry weekday reporting seasonality.
struct SyntheticScenario {
    int n_states = 10;
    int weeks = 120;
    std::map<std::string, int> term_lags;       // COVID terms: lead in days, >= 0
    std::map<std::string, int> flu_term_lags;   // flu terms: lead in weeks, >= 0
    double coupling = 0.6;                      // ILI <-> cases, in [-1, 1]
    std::vector<double> weekday_weights = {0.85, 1.15, 1.2, 1.1, 1.05, 0.9, 0.75};
    double noise_cases = 0.05;
    double noise_trends = 0.05;
    double noise_ili = 0.05;
    std::uint64_t seed = 1;

    void validate() const;
    static SyntheticScenario load_json(const std::string& path);
    std::string to_json() const;

    /// Scenario used by the end-to-end checks: planted 7-28 day leads,
    /// coupling 0.6, 10 states, 120 weeks.
    static SyntheticScenario reference();
};

/// Pure function of (scenario, seed): same scenario -> identical bundle.
DatasetBundle generate_synthetic(const SyntheticScenario& sc);

/// First day of the generated panel (a Sunday, so week 0 ends on day 6).
Date synthetic_start_day();

}  // namespace argo
