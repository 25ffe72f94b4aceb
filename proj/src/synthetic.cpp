#include "argo/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "argo/rng.hpp"

namespace argo {

using nlohmann::json;

void SyntheticScenario::validate() const {
    if (n_states < 1) throw Error("scenario: n_states must be >= 1");
    if (weeks < 8) throw Error("scenario: weeks must be >= 8");
    for (const auto& [term, lag] : term_lags) {
        if (lag < 0) throw Error("scenario: term '" + term + "' lag must be >= 0");
    }
    for (const auto& [term, lag] : flu_term_lags) {
        if (lag < 0) throw Error("scenario: flu term '" + term + "' lag must be >= 0");
    }
    if (weekday_weights.size() != 7) throw Error("scenario: need 7 weekday weights");
    double sum = 0.0;
    for (double w : weekday_weights) {
        if (!(w > 0.0)) throw Error("scenario: weekday weights must be positive");
        sum += w;
    }
    if (std::abs(sum - 7.0) > 1e-6) {
        throw Error("scenario: weekday weights must sum to 7");
    }
    if (!(coupling >= -1.0 && coupling <= 1.0)) {
        throw Error("scenario: coupling must lie in [-1, 1]");
    }
    if (noise_cases < 0 || noise_trends < 0 || noise_ili < 0) {
        throw Error("scenario: noise scales must be >= 0");
    }
}

SyntheticScenario SyntheticScenario::reference() {
    SyntheticScenario sc;
    sc.term_lags = {{"q-early", 7}, {"q-mid", 14}, {"q-late", 21}, {"q-vlate", 28}};
    sc.flu_term_lags = {{"flu-q1", 1}, {"flu-q2", 2}};
    return sc;
}

SyntheticScenario SyntheticScenario::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(path + ": " + e.what());
    }
    SyntheticScenario sc;
    for (const auto& [key, val] : j.items()) {
        try {
            if (key == "n_states") sc.n_states = val.get<int>();
            else if (key == "weeks") sc.weeks = val.get<int>();
            else if (key == "term_lags") sc.term_lags = val.get<std::map<std::string, int>>();
            else if (key == "flu_term_lags") sc.flu_term_lags = val.get<std::map<std::string, int>>();
            else if (key == "coupling") sc.coupling = val.get<double>();
            else if (key == "weekday_weights") sc.weekday_weights = val.get<std::vector<double>>();
            else if (key == "noise_cases") sc.noise_cases = val.get<double>();
            else if (key == "noise_trends") sc.noise_trends = val.get<double>();
            else if (key == "noise_ili") sc.noise_ili = val.get<double>();
            else if (key == "seed") sc.seed = val.get<std::uint64_t>();
            else throw Error(path + ": unknown scenario key '" + key + "'");
        } catch (const json::exception& e) {
            throw Error(path + ": key '" + key + "': " + e.what());
        }
    }
    sc.validate();
    return sc;
}

std::string SyntheticScenario::to_json() const {
    json j;
    j["n_states"] = n_states;
    j["weeks"] = weeks;
    j["term_lags"] = term_lags;
    j["flu_term_lags"] = flu_term_lags;
    j["coupling"] = coupling;
    j["weekday_weights"] = weekday_weights;
    j["noise_cases"] = noise_cases;
    j["noise_trends"] = noise_trends;
    j["noise_ili"] = noise_ili;
    j["seed"] = seed;
    return j.dump(2);
}

Date synthetic_start_day() { return Date(2020, 1, 5); }  // a Sunday

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct RegionParams {
    double p1, phi1, s1;
    double p2, phi2, s2;
    double pf, psi, famp;
};

struct StateParams {
    double scale;
    double dphi;
    double amp_jitter;
    double ifr;
    double flu_jitter;
};

std::string state_name(int i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "S%02d", i + 1);
    return buf;
}

}  // namespace

DatasetBundle generate_synthetic(const SyntheticScenario& sc) {
    sc.validate();
    const std::uint64_t seed = sc.seed;
    auto key = [&](std::string_view tag, std::uint64_t a = 0, std::uint64_t b = 0) {
        return Rng::derive_key(seed, {Rng::hash_str(tag), a, b});
    };

    const int n_regions = (sc.n_states + 4) / 5;
    int max_term_lag = 0;
    for (const auto& [_, lag] : sc.term_lags) max_term_lag = std::max(max_term_lag, lag);
    int max_flu_lag_weeks = 0;
    for (const auto& [_, lag] : sc.flu_term_lags) {
        max_flu_lag_weeks = std::max(max_flu_lag_weeks, lag);
    }

    const int days = 7 * sc.weeks;
    const int pre = 28;                              // death incubation reach-back
    const int post = max_term_lag + 7 * max_flu_lag_weeks + 7;
    const int ext_days = pre + days + post;          // latent grid [-pre, days+post)
    const int ext_weeks = sc.weeks + max_flu_lag_weeks + 1;

    std::vector<RegionParams> regions(static_cast<std::size_t>(n_regions));
    for (int r = 0; r < n_regions; ++r) {
        Rng rng(key("region", static_cast<std::uint64_t>(r)));
        RegionParams& p = regions[static_cast<std::size_t>(r)];
        p.p1 = rng.uniform(70, 120);
        p.phi1 = rng.uniform(0, p.p1);
        p.s1 = rng.uniform(0.5, 0.9);
        p.p2 = rng.uniform(150, 260);
        p.phi2 = rng.uniform(0, p.p2);
        p.s2 = rng.uniform(0.25, 0.5);
        p.pf = rng.uniform(150, 280);
        p.psi = rng.uniform(0, p.pf);
        p.famp = rng.uniform(0.8, 1.4);
    }

    DatasetBundle b;
    std::vector<std::pair<std::string, std::string>> state_regions;
    for (int i = 0; i < sc.n_states; ++i) {
        state_regions.emplace_back(state_name(i), "R" + std::to_string(i / 5 + 1));
    }
    b.geography = build_geography(state_regions);

    const Date start = synthetic_start_day();
    for (int i = 0; i < sc.n_states; ++i) {
        const std::string id = state_name(i);
        const RegionParams& rp = regions[static_cast<std::size_t>(i / 5)];
        Rng prng(key("state", static_cast<std::uint64_t>(i)));
        StateParams st;
        st.scale = std::exp(prng.normal(std::log(800.0), 0.4));
        st.dphi = prng.uniform(-5, 5);
        st.amp_jitter = prng.uniform(0.9, 1.1);
        st.ifr = 0.015 * prng.uniform(0.8, 1.2);
        st.flu_jitter = prng.uniform(-1.5, 1.5);

        // Latent daily intensity on the extended grid, index 0 <-> day -pre.
        std::vector<double> lambda(static_cast<std::size_t>(ext_days));
        {
            Rng g(key("latent", static_cast<std::uint64_t>(i)));
            double drift = 0.0;
            for (int t = 0; t < ext_days; ++t) {
                drift = 0.96 * drift + 0.03 * g.normal();
                double day = static_cast<double>(t - pre);
                double wave = rp.s1 * std::sin(kTwoPi * (day + rp.phi1 + st.dphi) / rp.p1) +
                              rp.s2 * std::sin(kTwoPi * (day + rp.phi2 + st.dphi) / rp.p2);
                lambda[static_cast<std::size_t>(t)] =
                    st.scale * std::exp(st.amp_jitter * wave + drift);
            }
        }
        auto lam = [&](int day) { return lambda[static_cast<std::size_t>(day + pre)]; };

        // Daily cases/deaths with weekday reporting weights.
        std::vector<double> cases_ext(static_cast<std::size_t>(days + post));
        {
            Rng noise(key("cases", static_cast<std::uint64_t>(i)));
            for (int t = 0; t < days + post; ++t) {
                double w = sc.weekday_weights[static_cast<std::size_t>(t % 7)];
                cases_ext[static_cast<std::size_t>(t)] =
                    std::max(0.0, lam(t) * w * (1.0 + sc.noise_cases * noise.normal()));
            }
        }
        std::vector<double> cases(cases_ext.begin(), cases_ext.begin() + days);
        std::vector<double> deaths(static_cast<std::size_t>(days));
        {
            Rng noise(key("deaths", static_cast<std::uint64_t>(i)));
            for (int t = 0; t < days; ++t) {
                double w = sc.weekday_weights[static_cast<std::size_t>(t % 7)];
                deaths[static_cast<std::size_t>(t)] = std::max(
                    0.0, st.ifr * lam(t - 21) * w * (1.0 + sc.noise_cases * noise.normal()));
            }
        }
        b.cases.emplace(id, DailySeries(b.geo(id), Signal::cases(), start, cases));
        b.deaths.emplace(id, DailySeries(b.geo(id), Signal::deaths(), start, deaths));

        // COVID search terms: term value today mirrors the case intensity
        // `lag` days ahead, so the term leads cases by exactly that lag.
        double lam_max = *std::max_element(lambda.begin(), lambda.end());
        for (const auto& [term, lag] : sc.term_lags) {
            Rng noise(key("trend", static_cast<std::uint64_t>(i), Rng::hash_str(term)));
            std::vector<double> x(static_cast<std::size_t>(days));
            for (int t = 0; t < days; ++t) {
                double v = 100.0 * lam(t + lag) / lam_max;
                x[static_cast<std::size_t>(t)] =
                    std::max(0.0, v * (1.0 + sc.noise_trends * noise.normal()));
            }
            TrendSeries ts;
            ts.daily = DailySeries(b.geo(id), Signal::search(term), start, std::move(x));
            b.trends.emplace(std::make_pair(id, term), std::move(ts));
        }

        // Weekly flu intensity and ILI. The ILI blends an independent flu
        // wave with standardized weekly cases at the requested coupling.
        std::vector<double> flu(static_cast<std::size_t>(ext_weeks));
        {
            Rng g(key("flu", static_cast<std::uint64_t>(i)));
            double h = 0.0;
            for (int w = 0; w < ext_weeks; ++w) {
                h = 0.7 * h + 0.25 * g.normal();
                double day = 7.0 * w + 6.0;
                flu[static_cast<std::size_t>(w)] =
                    std::max(0.05, 1.6 +
                                       rp.famp * std::sin(kTwoPi * (day + rp.psi + st.flu_jitter) / rp.pf) +
                                       h);
            }
        }
        std::vector<double> weekly_cases(static_cast<std::size_t>(ext_weeks), 0.0);
        for (int w = 0; w < ext_weeks; ++w) {
            for (int d = 0; d < 7; ++d) {
                int t = 7 * w + d;
                weekly_cases[static_cast<std::size_t>(w)] +=
                    t < days + post ? cases_ext[static_cast<std::size_t>(t)]
                                    : lam(t) * sc.weekday_weights[static_cast<std::size_t>(t % 7)];
            }
        }
        double mu = 0.0, sd = 0.0;
        for (int w = 0; w < sc.weeks; ++w) mu += weekly_cases[static_cast<std::size_t>(w)];
        mu /= sc.weeks;
        for (int w = 0; w < sc.weeks; ++w) {
            double d = weekly_cases[static_cast<std::size_t>(w)] - mu;
            sd += d * d;
        }
        sd = std::sqrt(sd / sc.weeks);
        if (sd <= 0) sd = 1.0;

        std::vector<double> ili_ext(static_cast<std::size_t>(ext_weeks));
        {
            Rng noise(key("ili", static_cast<std::uint64_t>(i)));
            for (int w = 0; w < ext_weeks; ++w) {
                double q = 1.8 + 0.9 * (weekly_cases[static_cast<std::size_t>(w)] - mu) / sd;
                double v = (1.0 - std::abs(sc.coupling)) * flu[static_cast<std::size_t>(w)] +
                           sc.coupling * q + sc.noise_ili * noise.normal();
                ili_ext[static_cast<std::size_t>(w)] = std::max(0.02, v);
            }
        }
        std::vector<double> ili(ili_ext.begin(), ili_ext.begin() + sc.weeks);
        Date first_sat = start.plus_days(6);
        b.ili.emplace(id, WeeklySeries(b.geo(id), Signal::ili(), first_sat, std::move(ili)));

        // Flu search terms lead weekly ILI by their lag in weeks.
        for (const auto& [term, lag] : sc.flu_term_lags) {
            Rng noise(key("flutrend", static_cast<std::uint64_t>(i), Rng::hash_str(term)));
            std::vector<double> x(static_cast<std::size_t>(sc.weeks));
            for (int w = 0; w < sc.weeks; ++w) {
                double v = 10.0 + 6.0 * ili_ext[static_cast<std::size_t>(w + lag)];
                x[static_cast<std::size_t>(w)] =
                    std::max(0.0, v * (1.0 + sc.noise_trends * noise.normal()));
            }
            TrendSeries ts;
            ts.weekly = WeeklySeries(b.geo(id), Signal::search(term), first_sat, std::move(x));
            b.trends.emplace(std::make_pair(id, term), std::move(ts));
        }
    }

    b.validate();
    return b;
}

}  // namespace argo
