#include "argo/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "argo/csv.hpp"

namespace argo {

const GeoUnit& DatasetBundle::geo(const std::string& id) const {
    for (const GeoUnit& g : geography) {
        if (g.id == id) return g;
    }
    throw Error("unknown geography '" + id + "'");
}

bool DatasetBundle::has_geo(const std::string& id) const {
    return std::any_of(geography.begin(), geography.end(),
                       [&](const GeoUnit& g) { return g.id == id; });
}

std::vector<std::string> DatasetBundle::state_ids() const {
    std::vector<std::string> out;
    for (const GeoUnit& g : geography) {
        if (g.level == GeoLevel::State) out.push_back(g.id);
    }
    return out;
}

std::vector<std::string> DatasetBundle::region_ids() const {
    std::vector<std::string> out;
    for (const GeoUnit& g : geography) {
        if (g.level == GeoLevel::Region) out.push_back(g.id);
    }
    return out;
}

std::string DatasetBundle::nation_id() const {
    for (const GeoUnit& g : geography) {
        if (g.level == GeoLevel::Nation) return g.id;
    }
    throw Error("bundle has no nation-level geography");
}

std::vector<std::string> DatasetBundle::neighbors_of(const std::string& state_id) const {
    const GeoUnit& g = geo(state_id);
    if (g.level != GeoLevel::State) {
        throw Error("neighbors_of: " + state_id + " is not a state");
    }
    return g.neighbors;
}

std::vector<std::string> DatasetBundle::term_names() const {
    std::set<std::string> names;
    for (const auto& [key, _] : trends) names.insert(key.second);
    return {names.begin(), names.end()};
}

void DatasetBundle::validate() const {
    for (const GeoUnit& g : geography) g.validate();
    auto known = [&](const std::string& id) { return has_geo(id); };
    for (const auto& [id, s] : cases) {
        if (!known(id)) throw Error("cases series references unknown geo '" + id + "'");
        (void)s;
    }
    for (const auto& [id, s] : deaths) {
        if (!known(id)) throw Error("deaths series references unknown geo '" + id + "'");
        (void)s;
    }
    for (const auto& [id, s] : ili) {
        if (!known(id)) throw Error("ili series references unknown geo '" + id + "'");
        (void)s;
    }
    for (const auto& [key, s] : trends) {
        if (!known(key.first)) {
            throw Error("trend series references unknown geo '" + key.first + "'");
        }
        if (s.daily.has_value() == s.weekly.has_value()) {
            throw Error("trend series " + key.first + "/" + key.second +
                        " must be exactly one of daily or weekly");
        }
    }
    // Frequency uniform within each term.
    std::map<std::string, bool> term_daily;
    for (const auto& [key, s] : trends) {
        auto it = term_daily.find(key.second);
        if (it == term_daily.end()) {
            term_daily[key.second] = s.is_daily();
        } else if (it->second != s.is_daily()) {
            throw Error("term '" + key.second + "' mixes daily and weekly series");
        }
    }
}

std::vector<GeoUnit> build_geography(
    const std::vector<std::pair<std::string, std::string>>& state_regions,
    const std::string& nation_id) {
    std::map<std::string, std::vector<std::string>> by_region;
    for (const auto& [state, region] : state_regions) by_region[region].push_back(state);
    for (auto& [_, members] : by_region) std::sort(members.begin(), members.end());

    std::vector<GeoUnit> geos;
    for (const auto& [state, region] : state_regions) {
        geos.push_back(GeoUnit::state(state, region, by_region.at(region)));
    }
    std::sort(geos.begin(), geos.end(),
              [](const GeoUnit& a, const GeoUnit& b) { return a.id < b.id; });
    for (const auto& [region, _] : by_region) geos.push_back(GeoUnit::region(region));
    geos.push_back(GeoUnit::nation(nation_id));
    return geos;
}

const std::map<std::string, std::string>& us_hhs_regions() {
    static const std::map<std::string, std::string> m = {
        {"CT", "R1"}, {"ME", "R1"}, {"MA", "R1"}, {"NH", "R1"}, {"RI", "R1"}, {"VT", "R1"},
        {"NJ", "R2"}, {"NY", "R2"}, {"NYC", "R2"},
        {"DE", "R3"}, {"DC", "R3"}, {"MD", "R3"}, {"PA", "R3"}, {"VA", "R3"}, {"WV", "R3"},
        {"AL", "R4"}, {"FL", "R4"}, {"GA", "R4"}, {"KY", "R4"}, {"MS", "R4"}, {"NC", "R4"},
        {"SC", "R4"}, {"TN", "R4"},
        {"IL", "R5"}, {"IN", "R5"}, {"MI", "R5"}, {"MN", "R5"}, {"OH", "R5"}, {"WI", "R5"},
        {"AR", "R6"}, {"LA", "R6"}, {"NM", "R6"}, {"OK", "R6"}, {"TX", "R6"},
        {"IA", "R7"}, {"KS", "R7"}, {"MO", "R7"}, {"NE", "R7"},
        {"CO", "R8"}, {"MT", "R8"}, {"ND", "R8"}, {"SD", "R8"}, {"UT", "R8"}, {"WY", "R8"},
        {"AZ", "R9"}, {"CA", "R9"}, {"HI", "R9"}, {"NV", "R9"},
        {"AK", "R10"}, {"ID", "R10"}, {"OR", "R10"}, {"WA", "R10"},
    };
    return m;
}

namespace {

struct RawDaily {
    std::map<long, double> by_serial;  // date serial -> value
};

DailySeries finish_daily(const std::string& file, const std::string& geo_id,
                         const GeoUnit& geo, Signal signal, const RawDaily& raw) {
    if (raw.by_serial.empty()) throw Error(file + ": no rows for geo " + geo_id);
    long first = raw.by_serial.begin()->first;
    long last = raw.by_serial.rbegin()->first;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(last - first + 1));
    for (long d = first; d <= last; ++d) {
        auto it = raw.by_serial.find(d);
        if (it == raw.by_serial.end()) {
            throw Error(file + ": geo " + geo_id + " missing interior date " +
                        Date(std::chrono::sys_days(std::chrono::days(d))).to_string());
        }
        values.push_back(it->second);
    }
    return DailySeries(geo, signal, Date(std::chrono::sys_days(std::chrono::days(first))),
                       std::move(values));
}

}  // namespace

DatasetBundle load_bundle(const RunConfig& cfg, LoadReport* report) {
    if (cfg.cases_csv.empty()) throw Error("config: cases_csv not set");
    if (cfg.ili_csv.empty()) throw Error("config: ili_csv not set");
    if (cfg.trends_csv.empty()) throw Error("config: trends_csv not set");

    LoadReport rep;

    // Pass 1: collect raw rows.
    std::map<std::string, RawDaily> raw_cases, raw_deaths;
    CsvReader cases_reader(cfg.cases_csv, {"date", "geo", "cases", "deaths"});
    cases_reader.for_each_row([&](const std::vector<std::string_view>& f, std::size_t line) {
        Date d;
        try {
            d = Date::parse(f[0]);
        } catch (const Error& e) {
            cases_reader.fail(line, 1, e.what());
        }
        std::string geo(f[1]);
        if (geo.empty()) cases_reader.fail(line, 2, "empty geo");
        bool ok1 = false, ok2 = false;
        double c = parse_double(f[2], &ok1);
        double dd = parse_double(f[3], &ok2);
        if (!ok1 || !std::isfinite(c) || c < 0) {
            cases_reader.fail(line, 3, "cases must be a finite number >= 0");
        }
        if (!ok2 || !std::isfinite(dd) || dd < 0) {
            cases_reader.fail(line, 4, "deaths must be a finite number >= 0");
        }
        if (!raw_cases[geo].by_serial.emplace(d.serial(), c).second) {
            cases_reader.fail(line, 1,
                              "duplicate row for (" + std::string(f[0]) + ", " + geo + ")");
        }
        raw_deaths[geo].by_serial.emplace(d.serial(), dd);
        ++rep.cases_rows;
    });

    struct RawWeekly {
        std::map<long, double> by_serial;
    };
    std::map<std::string, RawWeekly> raw_ili;
    CsvReader ili_reader(cfg.ili_csv, {"week_ending", "geo", "ili_pct"});
    ili_reader.for_each_row([&](const std::vector<std::string_view>& f, std::size_t line) {
        Date d;
        try {
            d = Date::parse(f[0]);
        } catch (const Error& e) {
            ili_reader.fail(line, 1, e.what());
        }
        if (!d.is_saturday()) {
            ili_reader.fail(line, 1, "week_ending " + d.to_string() + " is not a Saturday");
        }
        std::string geo(f[1]);
        if (geo.empty()) ili_reader.fail(line, 2, "empty geo");
        bool ok = false;
        double v = parse_double(f[2], &ok);
        if (!ok || !std::isfinite(v) || v < 0) {
            ili_reader.fail(line, 3, "ili_pct must be a finite number >= 0");
        }
        if (!raw_ili[geo].by_serial.emplace(d.serial(), v).second) {
            ili_reader.fail(line, 1, "duplicate row for (" + std::string(f[0]) + ", " + geo + ")");
        }
        ++rep.ili_rows;
    });

    std::map<std::pair<std::string, std::string>, RawDaily> raw_trends;
    CsvReader trends_reader(cfg.trends_csv, {"date", "geo", "term", "value"});
    trends_reader.for_each_row([&](const std::vector<std::string_view>& f, std::size_t line) {
        Date d;
        try {
            d = Date::parse(f[0]);
        } catch (const Error& e) {
            trends_reader.fail(line, 1, e.what());
        }
        std::string geo(f[1]);
        std::string term(f[2]);
        if (geo.empty()) trends_reader.fail(line, 2, "empty geo");
        if (term.empty()) trends_reader.fail(line, 3, "empty term");
        bool ok = false;
        double v = parse_double(f[3], &ok);
        if (!ok || !std::isfinite(v)) trends_reader.fail(line, 4, "value must be finite");
        if (!raw_trends[{geo, term}].by_serial.emplace(d.serial(), v).second) {
            trends_reader.fail(line, 1, "duplicate row for (" + std::string(f[0]) + ", " +
                                            geo + ", " + term + ")");
        }
        ++rep.trends_rows;
    });

    // Geography: explicit file, else the built-in US map.
    std::set<std::string> state_like;
    for (const auto& [geo, _] : raw_cases) state_like.insert(geo);
    for (const auto& [geo, _] : raw_ili) state_like.insert(geo);
    for (const auto& [key, _] : raw_trends) state_like.insert(key.first);

    std::vector<std::pair<std::string, std::string>> state_regions;
    std::set<std::string> non_states;  // ids that are regions/nation in the files
    if (!cfg.geography_csv.empty()) {
        CsvReader geo_reader(cfg.geography_csv, {"geo", "region"});
        std::set<std::string> seen;
        geo_reader.for_each_row([&](const std::vector<std::string_view>& f, std::size_t line) {
            std::string geo(f[0]), region(f[1]);
            if (geo.empty()) geo_reader.fail(line, 1, "empty geo");
            if (region.empty()) geo_reader.fail(line, 2, "empty region");
            if (!seen.insert(geo).second) geo_reader.fail(line, 1, "duplicate geo " + geo);
            state_regions.emplace_back(geo, region);
        });
        if (state_regions.empty()) throw Error(cfg.geography_csv + ": empty geography");
    } else {
        const auto& us = us_hhs_regions();
        for (const std::string& id : state_like) {
            if (id == "US") continue;
            auto it = us.find(id);
            if (it == us.end()) {
                // Region codes of the built-in map may appear as aggregate rows.
                bool is_region = id.size() >= 2 && id[0] == 'R';
                if (!is_region) {
                    throw Error("geo '" + id +
                                "' is not a known US state code; supply geography_csv");
                }
                non_states.insert(id);
                continue;
            }
            state_regions.emplace_back(id, it->second);
        }
        if (state_regions.empty()) throw Error("no state-level geography found in inputs");
    }

    DatasetBundle b;
    b.geography = build_geography(state_regions, "US");
    for (const std::string& id : non_states) {
        if (!b.has_geo(id)) b.geography.push_back(GeoUnit::region(id));
    }

    auto geo_of = [&](const std::string& id) -> const GeoUnit& {
        if (!b.has_geo(id)) {
            throw Error("series references geo '" + id + "' absent from geography");
        }
        return b.geo(id);
    };

    for (const auto& [geo, raw] : raw_cases) {
        b.cases.emplace(geo, finish_daily(cfg.cases_csv, geo, geo_of(geo),
                                          Signal::cases(), raw));
        b.deaths.emplace(geo, finish_daily(cfg.cases_csv, geo, geo_of(geo),
                                           Signal::deaths(), raw_deaths.at(geo)));
    }
    for (const auto& [geo, raw] : raw_ili) {
        long first = raw.by_serial.begin()->first;
        long last = raw.by_serial.rbegin()->first;
        std::vector<double> values;
        for (long d = first; d <= last; d += 7) {
            auto it = raw.by_serial.find(d);
            if (it == raw.by_serial.end()) {
                throw Error(cfg.ili_csv + ": geo " + geo + " missing interior week " +
                            Date(std::chrono::sys_days(std::chrono::days(d))).to_string());
            }
            values.push_back(it->second);
        }
        if (values.size() != raw.by_serial.size()) {
            throw Error(cfg.ili_csv + ": geo " + geo + " has weeks off the Saturday grid");
        }
        b.ili.emplace(geo, WeeklySeries(geo_of(geo), Signal::ili(),
                                        Date(std::chrono::sys_days(std::chrono::days(first))),
                                        std::move(values)));
    }
    for (const auto& [key, raw] : raw_trends) {
        const auto& [geo, term] = key;
        long first = raw.by_serial.begin()->first;
        long last = raw.by_serial.rbegin()->first;
        bool weekly_shaped = true;
        for (const auto& [serial, value] : raw.by_serial) {
            (void)value;
            Date d{std::chrono::sys_days(std::chrono::days(serial))};
            if (!d.is_saturday()) {
                weekly_shaped = false;
                break;
            }
        }
        if (weekly_shaped && raw.by_serial.size() > 1 &&
            static_cast<long>(raw.by_serial.size()) == (last - first) / 7 + 1) {
            std::vector<double> values;
            for (long d = first; d <= last; d += 7) values.push_back(raw.by_serial.at(d));
            TrendSeries t;
            t.weekly = WeeklySeries(geo_of(geo), Signal::search(term),
                                    Date(std::chrono::sys_days(std::chrono::days(first))),
                                    std::move(values));
            b.trends.emplace(key, std::move(t));
        } else {
            TrendSeries t;
            t.daily = finish_daily(cfg.trends_csv, geo + "/" + term, geo_of(geo),
                                   Signal::search(term), raw);
            b.trends.emplace(key, std::move(t));
        }
    }

    rep.n_states = b.state_ids().size();
    b.validate();
    if (report) *report = rep;
    return b;
}

void write_cases_csv(const DatasetBundle& b, const std::string& path) {
    CsvWriter w(path, {"date", "geo", "cases", "deaths"});
    // Rows ordered by (date, geo).
    std::map<std::pair<long, std::string>, std::pair<double, double>> rows;
    for (const auto& [geo, s] : b.cases) {
        const DailySeries& d = b.deaths.at(geo);
        for (std::size_t i = 0; i < s.size(); ++i) {
            rows[{s.date(i).serial(), geo}] = {s[i], d.at(s.date(i))};
        }
    }
    for (const auto& [key, v] : rows) {
        w.row({Date(std::chrono::sys_days(std::chrono::days(key.first))).to_string(),
               key.second, format_double(v.first), format_double(v.second)});
    }
    w.close();
}

void write_ili_csv(const DatasetBundle& b, const std::string& path) {
    CsvWriter w(path, {"week_ending", "geo", "ili_pct"});
    std::map<std::pair<long, std::string>, double> rows;
    for (const auto& [geo, s] : b.ili) {
        for (std::size_t i = 0; i < s.size(); ++i) rows[{s.week(i).serial(), geo}] = s[i];
    }
    for (const auto& [key, v] : rows) {
        w.row({Date(std::chrono::sys_days(std::chrono::days(key.first))).to_string(),
               key.second, format_double(v)});
    }
    w.close();
}

void write_trends_csv(const DatasetBundle& b, const std::string& path) {
    CsvWriter w(path, {"date", "geo", "term", "value"});
    std::map<std::tuple<long, std::string, std::string>, double> rows;
    for (const auto& [key, t] : b.trends) {
        const auto& [geo, term] = key;
        if (t.is_daily()) {
            for (std::size_t i = 0; i < t.daily->size(); ++i) {
                rows[{t.daily->date(i).serial(), geo, term}] = (*t.daily)[i];
            }
        } else {
            for (std::size_t i = 0; i < t.weekly->size(); ++i) {
                rows[{t.weekly->week(i).serial(), geo, term}] = (*t.weekly)[i];
            }
        }
    }
    for (const auto& [key, v] : rows) {
        w.row({Date(std::chrono::sys_days(std::chrono::days(std::get<0>(key)))).to_string(),
               std::get<1>(key), std::get<2>(key), format_double(v)});
    }
    w.close();
}

void write_geography_csv(const DatasetBundle& b, const std::string& path) {
    CsvWriter w(path, {"geo", "region"});
    for (const GeoUnit& g : b.geography) {
        if (g.level == GeoLevel::State) w.row({g.id, *g.region_of});
    }
    w.close();
}

// -- level accessors ---------------------------------------------------------

namespace {

std::vector<std::string> members_of(const DatasetBundle& b, const std::string& geo_id) {
    const GeoUnit& g = b.geo(geo_id);
    std::vector<std::string> members;
    for (const GeoUnit& s : b.geography) {
        if (s.level != GeoLevel::State) continue;
        if (g.level == GeoLevel::Nation ||
            (g.level == GeoLevel::Region && s.region_of == g.id)) {
            members.push_back(s.id);
        }
    }
    if (members.empty()) throw Error("no member states under geo '" + geo_id + "'");
    return members;
}

DailySeries sum_daily(const std::vector<DailySeries>& parts, const GeoUnit& geo) {
    std::vector<const DailySeries*> ptrs;
    for (const auto& p : parts) ptrs.push_back(&p);
    AlignedTable t = align(ptrs);
    std::vector<double> sum(t.dates.size(), 0.0);
    for (const auto& col : t.columns) {
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += col[i];
    }
    return DailySeries(geo, parts[0].signal(), t.dates.front(), std::move(sum));
}

}  // namespace

DailySeries daily_at_level(const DatasetBundle& b, const std::string& geo_id,
                           SignalKind kind) {
    const auto& store = (kind == SignalKind::Cases) ? b.cases : b.deaths;
    if (kind != SignalKind::Cases && kind != SignalKind::Deaths) {
        throw Error("daily_at_level supports cases/deaths only");
    }
    auto it = store.find(geo_id);
    if (it != store.end()) return it->second;
    std::vector<DailySeries> parts;
    for (const std::string& m : members_of(b, geo_id)) {
        auto mit = store.find(m);
        if (mit == store.end()) throw Error("missing " + std::string(kind == SignalKind::Cases ? "cases" : "deaths") + " series for state " + m);
        parts.push_back(mit->second);
    }
    return sum_daily(parts, b.geo(geo_id));
}

WeeklySeries ili_at_level(const DatasetBundle& b, const std::string& geo_id) {
    auto it = b.ili.find(geo_id);
    if (it != b.ili.end()) return it->second;
    std::vector<const WeeklySeries*> parts;
    std::vector<std::string> members = members_of(b, geo_id);
    for (const std::string& m : members) {
        auto mit = b.ili.find(m);
        if (mit == b.ili.end()) throw Error("missing ili series for state " + m);
        parts.push_back(&mit->second);
    }
    AlignedTable t = align(parts);
    std::vector<double> mean(t.dates.size(), 0.0);
    for (const auto& col : t.columns) {
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += col[i];
    }
    for (double& v : mean) v /= static_cast<double>(parts.size());
    return WeeklySeries(b.geo(geo_id), Signal::ili(), t.dates.front(), std::move(mean));
}

TrendSeries trend_at_level(const DatasetBundle& b, const std::string& geo_id,
                           const std::string& term) {
    auto it = b.trends.find({geo_id, term});
    if (it != b.trends.end()) return it->second;
    std::vector<std::string> members = members_of(b, geo_id);
    std::vector<DailySeries> daily_parts;
    std::vector<const WeeklySeries*> weekly_parts;
    for (const std::string& m : members) {
        auto mit = b.trends.find({m, term});
        if (mit == b.trends.end()) {
            throw Error("missing trend series (" + m + ", " + term + ")");
        }
        if (mit->second.is_daily()) daily_parts.push_back(*mit->second.daily);
        else weekly_parts.push_back(&*mit->second.weekly);
    }
    TrendSeries out;
    if (!daily_parts.empty() && weekly_parts.empty()) {
        out.daily = sum_daily(daily_parts, b.geo(geo_id));
        out.daily = DailySeries(b.geo(geo_id), Signal::search(term), out.daily->start(),
                                out.daily->values());
    } else if (daily_parts.empty() && !weekly_parts.empty()) {
        AlignedTable t = align(weekly_parts);
        std::vector<double> sum(t.dates.size(), 0.0);
        for (const auto& col : t.columns) {
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += col[i];
        }
        out.weekly = WeeklySeries(b.geo(geo_id), Signal::search(term), t.dates.front(),
                                  std::move(sum));
    } else {
        throw Error("term '" + term + "' mixes frequencies across states");
    }
    return out;
}

WeeklySeries truth_weekly(const DatasetBundle& b, const std::string& geo_id,
                          Target target) {
    if (target == Target::Ili) return ili_at_level(b, geo_id);
    DailySeries d = daily_at_level(
        b, geo_id, target == Target::Cases ? SignalKind::Cases : SignalKind::Deaths);
    Date anchor = d.start().plus_days(6).next_saturday_on_or_after();
    return aggregate_daily_to_weekly(d, anchor);
}

BundleView::BundleView(const DatasetBundle& b, Date as_of)
    : bundle_(&b), as_of_(as_of) {
    if (!as_of.is_saturday()) {
        throw Error("as-of date " + as_of.to_string() + " must be a Saturday");
    }
}

DailySeries BundleView::daily(const std::string& geo_id, SignalKind kind) const {
    return daily_at_level(*bundle_, geo_id, kind).truncated(as_of_);
}

WeeklySeries BundleView::ili(const std::string& geo_id) const {
    return ili_at_level(*bundle_, geo_id).truncated(as_of_);
}

TrendSeries BundleView::trend(const std::string& geo_id, const std::string& term) const {
    TrendSeries t = trend_at_level(*bundle_, geo_id, term);
    TrendSeries out;
    if (t.is_daily()) out.daily = t.daily->truncated(as_of_);
    else out.weekly = t.weekly->truncated(as_of_);
    return out;
}

WeeklySeries BundleView::weekly(const std::string& geo_id, SignalKind kind) const {
    DailySeries d = daily(geo_id, kind);
    Date anchor = d.start().plus_days(6).next_saturday_on_or_after();
    return aggregate_daily_to_weekly(d, anchor);
}

}  // namespace argo
