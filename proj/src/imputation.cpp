#include "argo/imputation.hpp"

#include <cmath>

#include "argo/csv.hpp"
#include "argo/rng.hpp"

namespace argo {

std::array<double, 7> impute_week(const std::array<double, 7>& donor_cases,
                                  double weekly_ili, bool* zero_donor) {
    if (!(weekly_ili >= 0.0)) throw Error("impute_week: weekly ILI must be >= 0");
    double total = 0.0;
    for (double v : donor_cases) {
        if (!(v >= 0.0)) throw Error("impute_week: donor cases must be >= 0");
        total += v;
    }
    std::array<double, 7> out{};
    if (total > 0.0) {
        if (zero_donor) *zero_donor = false;
        for (int i = 0; i < 7; ++i) out[static_cast<std::size_t>(i)] =
            donor_cases[static_cast<std::size_t>(i)] * weekly_ili / total;
    } else {
        // Degenerate donor: uniform profile keeps the weekly mass.
        if (zero_donor) *zero_donor = true;
        for (int i = 0; i < 7; ++i) out[static_cast<std::size_t>(i)] = weekly_ili / 7.0;
    }
    return out;
}

ImputationSet impute_area(const WeeklySeries& weekly_ili, const DailySeries& daily_cases,
                          const ImputationOptions& opt, std::uint64_t seed) {
    if (opt.draws < 1) throw Error("impute_area: draws must be >= 1");
    const std::size_t n_weeks = weekly_ili.size();

    // Donor eligibility: week endings from the configured first eligible week
    // (defaulting to the series start) whose 7 case days are all covered.
    std::size_t first_eligible = 0;
    if (opt.first_eligible_week) {
        auto idx = weekly_ili.index_of(opt.first_eligible_week->next_saturday_on_or_after());
        if (!idx) {
            if (*opt.first_eligible_week > weekly_ili.last_week()) {
                throw Error("impute_area: no eligible donor week");
            }
        } else {
            first_eligible = *idx;
        }
    }
    auto donor_covered = [&](std::size_t w) {
        Date sat = weekly_ili.week(w);
        return daily_cases.covers(sat.plus_days(-6)) && daily_cases.covers(sat);
    };
    while (first_eligible < n_weeks && !donor_covered(first_eligible)) ++first_eligible;
    for (std::size_t w = first_eligible; w < n_weeks; ++w) {
        if (!donor_covered(w)) {
            throw Error("impute_area: daily cases do not cover candidate donor week " +
                        weekly_ili.week(w).to_string());
        }
    }

    ImputationSet set;
    set.geo = weekly_ili.geo();
    set.weekly = weekly_ili;
    set.draws.reserve(static_cast<std::size_t>(opt.draws));
    set.source_weeks.assign(static_cast<std::size_t>(opt.draws),
                            std::vector<int>(n_weeks, -1));
    set.zero_donor.assign(static_cast<std::size_t>(opt.draws),
                          std::vector<bool>(n_weeks, false));

    const Date first_day = weekly_ili.first_week().plus_days(-6);
    const std::uint64_t geo_hash = Rng::hash_str(weekly_ili.geo().id);

    for (int n = 0; n < opt.draws; ++n) {
        std::vector<double> daily(7 * n_weeks, 0.0);
        for (std::size_t tau = 0; tau < n_weeks; ++tau) {
            if (tau < first_eligible) {
                throw Error("impute_area: no eligible donor week for week " +
                            weekly_ili.week(tau).to_string());
            }
            // Exclusive pools use strictly-past weeks; the very first
            // imputable week has no past and donates to itself.
            std::size_t hi_excl = opt.include_current || tau == first_eligible
                                      ? tau + 1
                                      : tau;
            // Substream keyed by (geo, draw, week): draws are order-independent
            // and stable as the series grows.
            Rng rng(Rng::derive_key(seed, {Rng::hash_str("impute"), geo_hash,
                                           static_cast<std::uint64_t>(n) << 32 |
                                               static_cast<std::uint64_t>(tau)}));
            std::size_t donor = static_cast<std::size_t>(
                rng.uniform_int(first_eligible, hi_excl - 1));
            Date donor_sat = weekly_ili.week(donor);
            std::array<double, 7> profile{};
            for (int j = 0; j < 7; ++j) {
                profile[static_cast<std::size_t>(6 - j)] = daily_cases.at(donor_sat.plus_days(-j));
            }
            bool degenerate = false;
            std::array<double, 7> imputed = impute_week(profile, weekly_ili[tau], &degenerate);
            for (int j = 0; j < 7; ++j) {
                daily[7 * tau + static_cast<std::size_t>(j)] = imputed[static_cast<std::size_t>(j)];
            }
            set.source_weeks[static_cast<std::size_t>(n)][tau] = static_cast<int>(donor);
            set.zero_donor[static_cast<std::size_t>(n)][tau] = degenerate;
        }
        set.draws.emplace_back(weekly_ili.geo(), Signal::ili(), first_day, std::move(daily));
    }
    return set;
}

WeeklySeries weekly_view(const ImputationSet& set, std::size_t draw) {
    if (set.draws.empty()) throw Error("weekly_view: empty imputation set");
    if (draw >= set.draws.size()) throw Error("weekly_view: draw out of range");
    return aggregate_daily_to_weekly(set.draws[draw], set.weekly.first_week());
}

void write_imputation_csv(const ImputationSet& set, const std::string& path) {
    CsvWriter w(path, {"draw", "date", "geo", "value", "donor_week"});
    for (std::size_t n = 0; n < set.draws.size(); ++n) {
        const DailySeries& s = set.draws[n];
        for (std::size_t i = 0; i < s.size(); ++i) {
            std::size_t week = i / 7;
            w.row({std::to_string(n), s.date(i).to_string(), set.geo.id,
                   format_double(s[i]),
                   set.weekly.week(static_cast<std::size_t>(
                       set.source_weeks[n][week])).to_string()});
        }
    }
    w.close();
}

}  // namespace argo
