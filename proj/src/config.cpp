#include "argo/config.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "argo/csv.hpp"

namespace argo {

using nlohmann::json;

std::string target_name(Target t) {
    switch (t) {
        case Target::Cases: return "cases";
        case Target::Deaths: return "deaths";
        case Target::Ili: return "ili";
    }
    return "?";
}

Target parse_target(const std::string& s) {
    if (s == "cases") return Target::Cases;
    if (s == "deaths") return Target::Deaths;
    if (s == "ili") return Target::Ili;
    throw Error("unknown target '" + s + "' (want cases|deaths|ili)");
}

LagTable LagTable::load_csv(const std::string& path) {
    LagTable t;
    CsvReader reader(path, {"term", "case_lag", "death_lag"});
    reader.for_each_row([&](const std::vector<std::string_view>& f, std::size_t line) {
        bool ok1 = false, ok2 = false;
        long cl = parse_long(f[1], &ok1);
        long dl = parse_long(f[2], &ok2);
        if (!ok1 || cl < 1) reader.fail(line, 2, "case_lag must be an integer >= 1");
        if (!ok2 || dl < 1) reader.fail(line, 3, "death_lag must be an integer >= 1");
        std::string term(f[0]);
        if (t.terms.count(term)) reader.fail(line, 1, "duplicate term '" + term + "'");
        t.terms[term] = TermLags{static_cast<int>(cl), static_cast<int>(dl)};
    });
    if (t.terms.empty()) throw Error(path + ": empty lag table");
    return t;
}

void LagTable::save_csv(const std::string& path) const {
    CsvWriter w(path, {"term", "case_lag", "death_lag"});
    for (const auto& [term, lags] : terms) {
        w.row({term, std::to_string(lags.case_lag), std::to_string(lags.death_lag)});
    }
    w.close();
}

LagTable LagTable::builtin_default() {
    LagTable t;
    auto add = [&](const char* term, int c, int d) { t.terms[term] = TermLags{c, d}; };
    add("coronavirus vaccine", 4, 5);
    add("cough", 4, 24);
    add("covid 19 vaccine", 34, 7);
    add("coronavirus exposure", 5, 13);
    add("coronavirus cases", 35, 30);
    add("coronavirus test", 35, 30);
    add("covid 19 cases", 35, 30);
    add("covid 19", 34, 21);
    add("exposed to coronavirus", 6, 24);
    add("fever", 4, 24);
    add("headache", 5, 29);
    add("how long covid 19", 6, 21);
    add("how long contagious", 6, 25);
    add("loss of smell", 10, 25);
    add("loss of taste", 11, 24);
    add("nausea", 10, 23);
    add("pneumonia", 34, 28);
    add("rapid covid 19", 8, 28);
    add("rapid coronavirus", 8, 27);
    add("robitussin", 35, 15);
    add("sore throat", 8, 30);
    add("sinus", 8, 15);
    add("symptoms of the covid 19", 16, 21);
    return t;
}

void RunConfig::validate() const {
    if (horizons.empty()) throw Error("config: horizons empty");
    for (int h : horizons) {
        if (h < 1 || h > 4) throw Error("config: horizons must be within 1..4 weeks");
    }
    if (targets.empty()) throw Error("config: targets empty");
    if (imputation_draws < 1) throw Error("config: imputation_draws must be >= 1");
    if (national_train_days < 28) throw Error("config: national_train_days must be >= 28");
    if (state_train_weeks < 1 || ensemble_window_weeks < 1 || ili_train_weeks < 1) {
        throw Error("config: training windows must be positive");
    }
    if (ili_ar_lags < 1) throw Error("config: ili_ar_lags must be >= 1");
    if (cv_folds < 2) throw Error("config: cv_folds must be >= 2");
    if (lambda_grid.empty()) throw Error("config: lambda_grid empty");
    for (double l : lambda_grid) {
        if (!(l >= 0.0)) throw Error("config: lambda_grid values must be >= 0");
    }
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end())) {
        throw Error("config: lambda_grid must be sorted ascending");
    }
    if (lag_candidates_from_to.size() != 2 || lag_candidates_from_to[0] < 1 ||
        lag_candidates_from_to[1] < lag_candidates_from_to[0]) {
        throw Error("config: lag_candidates_from_to must be [lo, hi] with 1 <= lo <= hi");
    }
    if (threads < 0) throw Error("config: threads must be >= 0");
}

namespace {

std::vector<int> to_int_vec(const json& j, const char* key) {
    std::vector<int> v;
    for (const auto& e : j) v.push_back(e.get<int>());
    if (v.empty()) throw Error(std::string("config: ") + key + " empty");
    return v;
}

}  // namespace

RunConfig RunConfig::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(path + ": " + e.what());
    }
    if (!j.is_object()) throw Error(path + ": config must be a JSON object");

    RunConfig c;
    for (const auto& [key, val] : j.items()) {
        try {
            if (key == "horizons") c.horizons = to_int_vec(val, "horizons");
            else if (key == "targets") {
                c.targets.clear();
                for (const auto& e : val) c.targets.push_back(parse_target(e.get<std::string>()));
            }
            else if (key == "imputation_draws") c.imputation_draws = val.get<int>();
            else if (key == "national_train_days") c.national_train_days = val.get<int>();
            else if (key == "state_train_weeks") c.state_train_weeks = val.get<int>();
            else if (key == "ensemble_window_weeks") c.ensemble_window_weeks = val.get<int>();
            else if (key == "ili_train_weeks") c.ili_train_weeks = val.get<int>();
            else if (key == "ili_ar_lags") c.ili_ar_lags = val.get<int>();
            else if (key == "cv_folds") c.cv_folds = val.get<int>();
            else if (key == "lambda_grid") {
                c.lambda_grid.clear();
                for (const auto& e : val) c.lambda_grid.push_back(e.get<double>());
            }
            else if (key == "seed") c.seed = val.get<std::uint64_t>();
            else if (key == "threads") c.threads = val.get<int>();
            else if (key == "donor_include_current") c.donor_include_current = val.get<bool>();
            else if (key == "first_eligible_week") c.first_eligible_week = Date::parse(val.get<std::string>());
            else if (key == "lag_window_start") c.lag_window_start = Date::parse(val.get<std::string>());
            else if (key == "lag_window_end") c.lag_window_end = Date::parse(val.get<std::string>());
            else if (key == "lag_candidates_from_to") c.lag_candidates_from_to = to_int_vec(val, "lag_candidates_from_to");
            else if (key == "cases_csv") c.cases_csv = val.get<std::string>();
            else if (key == "ili_csv") c.ili_csv = val.get<std::string>();
            else if (key == "trends_csv") c.trends_csv = val.get<std::string>();
            else if (key == "geography_csv") c.geography_csv = val.get<std::string>();
            else if (key == "lag_table_csv") c.lag_table_csv = val.get<std::string>();
            else throw Error(path + ": unknown config key '" + key + "'");
        } catch (const json::exception& e) {
            throw Error(path + ": key '" + key + "': " + e.what());
        }
    }
    c.validate();
    return c;
}

std::string RunConfig::to_json() const {
    json j;
    j["horizons"] = horizons;
    {
        std::vector<std::string> ts;
        for (Target t : targets) ts.push_back(target_name(t));
        j["targets"] = ts;
    }
    j["imputation_draws"] = imputation_draws;
    j["national_train_days"] = national_train_days;
    j["state_train_weeks"] = state_train_weeks;
    j["ensemble_window_weeks"] = ensemble_window_weeks;
    j["ili_train_weeks"] = ili_train_weeks;
    j["ili_ar_lags"] = ili_ar_lags;
    j["cv_folds"] = cv_folds;
    j["lambda_grid"] = lambda_grid;
    j["seed"] = seed;
    j["threads"] = threads;
    j["donor_include_current"] = donor_include_current;
    if (first_eligible_week) j["first_eligible_week"] = first_eligible_week->to_string();
    if (lag_window_start) j["lag_window_start"] = lag_window_start->to_string();
    if (lag_window_end) j["lag_window_end"] = lag_window_end->to_string();
    j["lag_candidates_from_to"] = lag_candidates_from_to;
    if (!cases_csv.empty()) j["cases_csv"] = cases_csv;
    if (!ili_csv.empty()) j["ili_csv"] = ili_csv;
    if (!trends_csv.empty()) j["trends_csv"] = trends_csv;
    if (!geography_csv.empty()) j["geography_csv"] = geography_csv;
    if (!lag_table_csv.empty()) j["lag_table_csv"] = lag_table_csv;
    return j.dump(2);
}

std::uint64_t RunConfig::config_hash() const {
    // Hash of the canonical JSON, minus the thread count: threading must not
    // change any output, so two runs differing only in threads share a hash.
    RunConfig c = *this;
    c.threads = 0;
    return fnv1a(c.to_json());
}

}  // namespace argo
