#include <doctest.h>

#include <cmath>
#include <fstream>

#include "argo/ensemble.hpp"
#include "argo/national.hpp"
#include "argo/rng.hpp"

using namespace argo;

namespace {

Date week0() { return Date(2020, 7, 4); }  // a Saturday

// History with per-method constant offsets from a known truth path, so the
// window MSEs are hand-computable.
struct World {
    ForecastTable history;
    std::map<long, double> truth;  // week serial -> value

    TruthLookup lookup() const {
        return [this](const std::string&, Target, Date w) -> std::optional<double> {
            auto it = truth.find(w.serial());
            if (it == truth.end()) return std::nullopt;
            return it->second;
        };
    }
};

World build_world(const std::vector<std::pair<std::string, double>>& method_offsets,
                  int weeks, const std::string& geo = "GA") {
    World w;
    for (int i = 0; i < weeks; ++i) {
        Date wk = week0().plus_weeks(i);
        double actual = 100.0 + 3.0 * i;
        w.truth[wk.serial()] = actual;
        for (const auto& [method, offset] : method_offsets) {
            w.history.add({geo, wk, 1, method_name(method, Target::Cases),
                           actual + offset});
        }
    }
    return w;
}

}  // namespace

TEST_CASE("single constituent is always chosen") {
    World w = build_world({{"naive", 2.0}}, 15);
    SelectionEntry e = select(w.history, w.lookup(), {"naive"}, 15,
                              {"GA", Target::Cases, 1}, week0().plus_weeks(14));
    CHECK(e.chosen == "naive");
    REQUIRE(e.window_mse.size() == 1);
    CHECK(e.window_mse[0].second == doctest::Approx(4.0));
    CHECK(e.window_start == week0());
    CHECK(e.window_end == week0().plus_weeks(14));
}

TEST_CASE("zero-error constituent wins; 3.5 beats 4.0") {
    World w = build_world({{"a", 2.0}, {"b", 0.0}}, 15);
    SelectionEntry e = select(w.history, w.lookup(), {"a", "b"}, 15,
                              {"GA", Target::Cases, 1}, week0().plus_weeks(14));
    CHECK(e.chosen == "b");

    World w2 = build_world({{"a", 2.0}, {"b", std::sqrt(3.5)}}, 15);
    SelectionEntry e2 = select(w2.history, w2.lookup(), {"a", "b"}, 15,
                               {"GA", Target::Cases, 1}, week0().plus_weeks(14));
    CHECK(e2.window_mse[0].second == doctest::Approx(4.0));
    CHECK(e2.window_mse[1].second == doctest::Approx(3.5));
    CHECK(e2.chosen == "b");
}

TEST_CASE("ties break by registry order") {
    World w = build_world({{"a", 1.0}, {"b", -1.0}}, 15);  // equal MSE = 1
    SelectionEntry e = select(w.history, w.lookup(), {"a", "b"}, 15,
                              {"GA", Target::Cases, 1}, week0().plus_weeks(14));
    CHECK(e.chosen == "a");
    SelectionEntry e2 = select(w.history, w.lookup(), {"b", "a"}, 15,
                               {"GA", Target::Cases, 1}, week0().plus_weeks(14));
    CHECK(e2.chosen == "b");
}

TEST_CASE("methods missing window coverage are excluded with a warning") {
    World w = build_world({{"a", 2.0}}, 15);
    // Method b only has the last 5 weeks.
    for (int i = 10; i < 15; ++i) {
        Date wk = week0().plus_weeks(i);
        w.history.add({"GA", wk, 1, method_name("b", Target::Cases),
                       w.truth[wk.serial()]});
    }
    SelectionEntry e = select(w.history, w.lookup(), {"a", "b"}, 15,
                              {"GA", Target::Cases, 1}, week0().plus_weeks(14));
    CHECK(e.chosen == "a");
    REQUIRE(e.warnings.size() == 1);
    CHECK(e.warnings[0].find("b") != std::string::npos);

    // All methods missing -> error.
    SelectionEntry dummy;
    CHECK_THROWS_AS(dummy = select(w.history, w.lookup(), {"c"}, 15,
                                   {"GA", Target::Cases, 1}, week0().plus_weeks(14)),
                    Error);
}

TEST_CASE("selection matches an independent argmin oracle on random instances") {
    Rng rng(77);
    for (int rep = 0; rep < 200; ++rep) {
        int n_methods = 2 + static_cast<int>(rng.uniform_int(0, 3));
        std::vector<std::pair<std::string, double>> offsets;
        std::vector<std::string> order;
        for (int m = 0; m < n_methods; ++m) {
            std::string name = "m" + std::to_string(m);
            offsets.emplace_back(name, rng.uniform(-5.0, 5.0));
            order.push_back(name);
        }
        World w = build_world(offsets, 15);
        SelectionEntry e = select(w.history, w.lookup(), order, 15,
                                  {"GA", Target::Cases, 1}, week0().plus_weeks(14));
        // Oracle: constant offsets make MSE = offset^2.
        std::string best = order[0];
        double best_mse = offsets[0].second * offsets[0].second;
        for (int m = 1; m < n_methods; ++m) {
            double mse = offsets[static_cast<std::size_t>(m)].second *
                         offsets[static_cast<std::size_t>(m)].second;
            if (mse < best_mse) {
                best_mse = mse;
                best = order[static_cast<std::size_t>(m)];
            }
        }
        CHECK(e.chosen == best);
    }
}

TEST_CASE("ensemble copies the chosen constituent's value verbatim") {
    World w = build_world({{"a", 2.0}, {"b", 0.5}}, 16);
    RunConfig cfg;
    cfg.targets = {Target::Cases};
    cfg.horizons = {1};
    cfg.ensemble_window_weeks = 15;
    Date as_of = week0().plus_weeks(14);
    // Current forecasts for target week as_of + 1: already in history
    // (build_world wrote 16 weeks; truth covers them all, but selection only
    // reads the 15 ending at as_of).
    std::vector<SelectionEntry> entries;
    ForecastTable out = forecast_ensemble(w.history, w.history, w.lookup(), {"a", "b"},
                                          cfg, {"GA"}, as_of, &entries);
    REQUIRE(out.size() == 1);
    const ForecastRow* chosen_row =
        w.history.find("GA", as_of.plus_weeks(1), 1, method_name("b", Target::Cases));
    REQUIRE(chosen_row != nullptr);
    ForecastRow ens = out.rows()[0];
    CHECK(ens.method == "argox-joint-ensemble-cases");
    CHECK(ens.value == chosen_row->value);  // bitwise copy
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].chosen == "b");
}

TEST_CASE("degenerate registry of naive only makes the ensemble naive") {
    World w = build_world({{"naive", 1.5}}, 16);
    RunConfig cfg;
    cfg.targets = {Target::Cases};
    cfg.horizons = {1};
    Date as_of = week0().plus_weeks(14);
    ForecastTable out = forecast_ensemble(w.history, w.history, w.lookup(), {"naive"},
                                          cfg, {"GA"}, as_of, nullptr);
    const ForecastRow* naive_row =
        w.history.find("GA", as_of.plus_weeks(1), 1, method_name("naive", Target::Cases));
    CHECK(out.rows()[0].value == naive_row->value);
}

TEST_CASE("adding a constituent changes selection only when strictly better") {
    World w = build_world({{"a", 1.0}}, 15);
    Date as_of = week0().plus_weeks(14);
    SelectionEntry before = select(w.history, w.lookup(), {"a"}, 15,
                                   {"GA", Target::Cases, 1}, as_of);
    CHECK(before.chosen == "a");

    // Equal-MSE newcomer loses the tie against the incumbent order.
    World w2 = build_world({{"a", 1.0}, {"c", -1.0}}, 15);
    SelectionEntry tie = select(w2.history, w2.lookup(), {"a", "c"}, 15,
                                {"GA", Target::Cases, 1}, as_of);
    CHECK(tie.chosen == "a");

    // Strictly better newcomer takes over.
    World w3 = build_world({{"a", 1.0}, {"c", 0.5}}, 15);
    SelectionEntry better = select(w3.history, w3.lookup(), {"a", "c"}, 15,
                                   {"GA", Target::Cases, 1}, as_of);
    CHECK(better.chosen == "c");
}

TEST_CASE("registry rejects duplicates and preserves order") {
    ConstituentRegistry reg;
    reg.add({"x", nullptr});
    reg.add({"y", nullptr});
    Constituent dup{"x", nullptr};
    CHECK_THROWS_AS(reg.add(dup), Error);
    CHECK(reg.names() == std::vector<std::string>{"x", "y"});
}

TEST_CASE("selection record csv carries one row per method with the shares format") {
    World w = build_world({{"a", 2.0}, {"b", 0.5}}, 15);
    SelectionEntry e = select(w.history, w.lookup(), {"a", "b"}, 15,
                              {"GA", Target::Cases, 1}, week0().plus_weeks(14));
    write_selections_csv({e}, "/tmp/argo_sel_test.csv");
    std::ifstream in("/tmp/argo_sel_test.csv");
    std::string header, r1, r2;
    std::getline(in, header);
    std::getline(in, r1);
    std::getline(in, r2);
    CHECK(header == "geo,target,horizon,chosen,method,mse,window_start,window_end");
    CHECK(r1.find("GA,cases,1,b,a,") == 0);
    CHECK(r2.find("GA,cases,1,b,b,") == 0);
}
