#include <doctest.h>

#include <set>

#include "argo/design.hpp"
#include "argo/imputation.hpp"
#include "argo/rng.hpp"
#include "argo/synthetic.hpp"

using namespace argo;

namespace {

struct Fixture {
    DatasetBundle bundle;
    Date as_of;
    LagTable lags;
    DailySeries ili_draw;

    static Fixture make(std::uint64_t seed = 21) {
        SyntheticScenario sc;
        sc.n_states = 3;
        sc.weeks = 75;
        sc.term_lags = {{"qa", 4}, {"qb", 9}};
        sc.flu_term_lags = {{"fq", 1}};
        sc.seed = seed;
        DatasetBundle b = generate_synthetic(sc);
        Date as_of = b.ili.at("S01").last_week();
        LagTable lags;
        lags.terms["qa"] = {4, 10};
        lags.terms["qb"] = {9, 20};
        BundleView v(b, as_of);
        ImputationOptions opt;
        opt.draws = 1;
        ImputationSet set =
            impute_area(v.ili("US"), v.daily("US", SignalKind::Cases), opt, seed);
        return Fixture{std::move(b), as_of, std::move(lags), set.draws[0]};
    }
};

}  // namespace

TEST_CASE("case design: 56 rows, horizon-adjusted lags, fixed column layout") {
    Fixture f = Fixture::make();
    BundleView v(f.bundle, f.as_of);
    for (int l : {7, 14, 21, 28}) {
        DesignMatrix d = build_case_design(v, f.ili_draw, "US", l, f.lags, f.as_of, 56);
        CHECK(d.x.rows() == 56);
        CHECK(d.y.size() == 56);
        CHECK(d.response_dates.front() == f.as_of.plus_days(-55));
        CHECK(d.response_dates.back() == f.as_of);
        CHECK(d.pred_date == f.as_of.plus_days(l));
        // 7 AR + 4 weekly + 2 terms + 6 weekday + 4 ILI.
        REQUIRE(d.cols.size() == 23);
        for (const DesignColumn& c : d.cols) {
            if (c.kind == ColumnKind::Weekday) continue;
            CHECK(c.lag_days >= l);
        }
        // Search lag = max(O_k, l).
        for (const DesignColumn& c : d.cols) {
            if (c.name == "term_qa") CHECK(c.lag_days == std::max(4, l));
            if (c.name == "term_qb") CHECK(c.lag_days == std::max(9, l));
        }
    }
}

TEST_CASE("weekday indicators: row sums in {0,1}, zero exactly on Sundays") {
    Fixture f = Fixture::make();
    BundleView v(f.bundle, f.as_of);
    DesignMatrix d = build_case_design(v, f.ili_draw, "US", 3, f.lags, f.as_of, 56);
    std::vector<int> wd_cols;
    for (std::size_t c = 0; c < d.cols.size(); ++c) {
        if (d.cols[c].kind == ColumnKind::Weekday) wd_cols.push_back(static_cast<int>(c));
    }
    REQUIRE(wd_cols.size() == 6);
    for (int r = 0; r < d.x.rows(); ++r) {
        double sum = 0;
        for (int c : wd_cols) sum += d.x(r, c);
        Date resp = d.response_dates[static_cast<std::size_t>(r)];
        if (resp.is_sunday()) CHECK(sum == 0.0);
        else CHECK(sum == 1.0);
    }
}

TEST_CASE("death design: AR block reads deaths, weekly block reads cases") {
    Fixture f = Fixture::make();
    BundleView v(f.bundle, f.as_of);
    const int l = 7;
    DesignMatrix d = build_death_design(v, f.ili_draw, "US", l, f.lags, f.as_of, 56);
    DailySeries deaths = v.daily("US", SignalKind::Deaths);
    DailySeries cases = v.daily("US", SignalKind::Cases);
    // Column-name audit plus a value audit against the source series.
    CHECK(d.cols[0].name == "ar_deaths_0");
    CHECK(d.cols[7].name == "wk_cases_7");
    for (int r = 0; r < d.x.rows(); ++r) {
        Date resp = d.response_dates[static_cast<std::size_t>(r)];
        CHECK(d.x(r, 0) == deaths.at(resp.plus_days(-l)));        // y^D_{t-0}
        CHECK(d.x(r, 7) == cases.at(resp.plus_days(-std::max(7, l))));  // y^C_{t+l-j}
        CHECK(d.y[r] == deaths.at(resp));
    }
    // Search columns use the death-optimal lags.
    for (const DesignColumn& c : d.cols) {
        if (c.name == "term_qa") CHECK(c.lag_days == 10);
        if (c.name == "term_qb") CHECK(c.lag_days == 20);
    }
}

TEST_CASE("horizon 28 forces every weekly and ILI lag to 28") {
    Fixture f = Fixture::make();
    BundleView v(f.bundle, f.as_of);
    DesignMatrix d = build_case_design(v, f.ili_draw, "US", 28, f.lags, f.as_of, 56);
    for (const DesignColumn& c : d.cols) {
        if (c.kind == ColumnKind::WeeklyLag || c.kind == ColumnKind::IliLag) {
            CHECK(c.lag_days == 28);
        }
    }
}

TEST_CASE("AR block lags are horizon plus 0..6") {
    Fixture f = Fixture::make();
    BundleView v(f.bundle, f.as_of);
    DesignMatrix d = build_case_design(v, f.ili_draw, "US", 5, f.lags, f.as_of, 56);
    for (int i = 0; i <= 6; ++i) {
        CHECK(d.cols[static_cast<std::size_t>(i)].kind == ColumnKind::ArLag);
        CHECK(d.cols[static_cast<std::size_t>(i)].lag_days == 5 + i);
    }
}

TEST_CASE("insufficient history errors name the binding column") {
    Fixture f = Fixture::make();
    BundleView v(f.bundle, f.as_of);
    try {
        build_case_design(v, f.ili_draw, "US", 7, f.lags, f.as_of, 5000);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("insufficient history") != std::string::npos);
    }
}

TEST_CASE("no leakage: every feature in the prediction row dates on or before as-of") {
    Fixture f = Fixture::make(31);
    BundleView v(f.bundle, f.as_of);
    for (int l : {1, 9, 20, 28}) {
        DesignMatrix d = build_case_design(v, f.ili_draw, "US", l, f.lags, f.as_of, 56);
        for (const DesignColumn& c : d.cols) {
            if (c.kind == ColumnKind::Weekday) continue;
            CHECK(d.pred_date.plus_days(-c.lag_days) <= f.as_of);
        }
        // Determinism: rebuilding yields identical matrices.
        DesignMatrix d2 = build_case_design(v, f.ili_draw, "US", l, f.lags, f.as_of, 56);
        CHECK(d.x == d2.x);
        CHECK(d.x_pred == d2.x_pred);
    }
}

TEST_CASE("select_optimal_lag recovers a planted shift exactly") {
    GeoUnit g = GeoUnit::nation();
    Rng rng(40);
    std::vector<double> base;
    for (int t = 0; t < 200; ++t) {
        base.push_back(50.0 + 30.0 * std::sin(t / 9.0) + 10.0 * std::sin(t / 23.0) +
                       rng.uniform(-0.5, 0.5));
    }
    const int d = 11;
    // term(t) = target(t + d): the term leads the target by d days.
    DailySeries term(g, Signal::search("q"), Date(2020, 3, 1),
                     std::vector<double>(base.begin() + d, base.end()));
    DailySeries tgt(g, Signal::cases(), Date(2020, 3, 1), base);
    std::vector<int> candidates;
    for (int c = 1; c <= 30; ++c) candidates.push_back(c);
    int got = select_optimal_lag(term, tgt, candidates, Date(2020, 4, 1), Date(2020, 8, 1));
    CHECK(got == d);
}

TEST_CASE("select_optimal_lag with two candidates picks the planted one") {
    GeoUnit g = GeoUnit::nation();
    std::vector<double> base;
    for (int t = 0; t < 150; ++t) base.push_back(10.0 + std::sin(t / 5.0) * 4.0);
    DailySeries term(g, Signal::search("q"), Date(2020, 3, 1),
                     std::vector<double>(base.begin() + 9, base.end()));
    DailySeries tgt(g, Signal::cases(), Date(2020, 3, 1), base);
    int got = select_optimal_lag(term, tgt, {3, 9}, Date(2020, 4, 1), Date(2020, 6, 1));
    CHECK(got == 9);

    std::vector<int> none;
    CHECK_THROWS_AS(select_optimal_lag(term, tgt, none, Date(2020, 4, 1), Date(2020, 6, 1)),
                    Error);
}

TEST_CASE("build_lag_table recovers planted lags from the synthetic panel") {
    SyntheticScenario sc;
    sc.n_states = 2;
    sc.weeks = 50;
    sc.noise_cases = 0.0;
    sc.noise_trends = 0.0;
    sc.weekday_weights = std::vector<double>(7, 1.0);
    sc.term_lags = {{"qa", 6}, {"qb", 17}};
    sc.seed = 5;
    DatasetBundle b = generate_synthetic(sc);
    Date as_of = b.ili.at("S01").last_week();
    RunConfig cfg;
    cfg.lag_window_start = Date(2020, 3, 7);
    cfg.lag_window_end = as_of;
    cfg.lag_candidates_from_to = {1, 30};
    LagTable t = build_lag_table(BundleView(b, as_of), cfg);
    CHECK(t.terms.at("qa").case_lag == 6);
    CHECK(t.terms.at("qb").case_lag == 17);
    // Deaths lag the cases by 21 days in the generator.
    CHECK(t.terms.at("qa").death_lag == 6 + 21);
}

TEST_CASE("ILI design: 52 rows, lag-1 exogenous cases, AR lags weekly") {
    Fixture f = Fixture::make();
    BundleView v(f.bundle, f.as_of);
    DesignMatrix d = build_ili_design(v, "US", f.as_of, 52, 13);
    CHECK(d.x.rows() == 52);
    CHECK(d.pred_date == f.as_of.plus_weeks(1));
    // 13 AR + 1 flu term + 4 covid lags.
    REQUIRE(d.cols.size() == 18);
    WeeklySeries wk_cases = v.weekly("US", SignalKind::Cases);
    WeeklySeries ili = v.ili("US");
    int covid1 = -1, ar1 = -1;
    for (std::size_t c = 0; c < d.cols.size(); ++c) {
        if (d.cols[c].name == "wk_cases_1") covid1 = static_cast<int>(c);
        if (d.cols[c].name == "ar_ili_1") ar1 = static_cast<int>(c);
    }
    REQUIRE(covid1 >= 0);
    REQUIRE(ar1 >= 0);
    for (int r = 0; r < d.x.rows(); ++r) {
        Date resp = d.response_dates[static_cast<std::size_t>(r)];
        CHECK(d.x(r, covid1) == wk_cases.at(resp.plus_weeks(-1)));
        CHECK(d.x(r, ar1) == ili.at(resp.plus_weeks(-1)));
        CHECK(d.y[r] == ili.at(resp));
    }
    // Prediction row reads only data on or before as-of.
    CHECK(d.x_pred[ar1] == ili.at(f.as_of));
    CHECK(d.x_pred[covid1] == wk_cases.at(f.as_of));
}

TEST_CASE("ILI design with zero COVID history leaves all-zero exogenous columns") {
    // Hand-built bundle: flat ILI, zero cases.
    std::vector<std::pair<std::string, std::string>> regions{{"AA", "R1"}};
    DatasetBundle b;
    b.geography = build_geography(regions);
    Date start = Date(2020, 3, 1);
    int days = 70 * 7;
    b.cases.emplace("AA", DailySeries(b.geo("AA"), Signal::cases(), start,
                                      std::vector<double>(days, 0.0)));
    b.deaths.emplace("AA", DailySeries(b.geo("AA"), Signal::deaths(), start,
                                       std::vector<double>(days, 0.0)));
    std::vector<double> ili;
    for (int w = 0; w < 70; ++w) ili.push_back(2.0 + 0.5 * std::sin(w / 3.0));
    b.ili.emplace("AA", WeeklySeries(b.geo("AA"), Signal::ili(), start.plus_days(6), ili));
    Date as_of = b.ili.at("AA").last_week();
    DesignMatrix d = build_ili_design(BundleView(b, as_of), "AA", as_of, 52, 3);
    for (std::size_t c = 0; c < d.cols.size(); ++c) {
        if (d.cols[c].kind == ColumnKind::WeeklyLag) {
            CHECK(d.x.col(static_cast<Eigen::Index>(c)).isZero(0.0));
        }
    }
}
