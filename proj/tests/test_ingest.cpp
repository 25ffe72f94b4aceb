#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "argo/bundle.hpp"
#include "argo/forecast_table.hpp"

using namespace argo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("argo_ingest_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& content) const {
        fs::path p = path / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
};

// Three states across two regions, two weeks of days, one term, two ILI weeks.
RunConfig fixture_config(const TempDir& dir) {
    std::string cases = "date,geo,cases,deaths\n";
    std::string trends = "date,geo,term,value\n";
    for (int d = 0; d < 14; ++d) {
        Date day = Date(2020, 3, 1).plus_days(d);  // 2020-03-01 is a Sunday
        for (const char* geo : {"GA", "AL", "NY"}) {
            cases += day.to_string() + "," + geo + ",10,1\n";
            trends += day.to_string() + "," + geo + ",fever,5\n";
        }
    }
    std::string ili = "week_ending,geo,ili_pct\n";
    for (int w = 0; w < 2; ++w) {
        Date sat = Date(2020, 3, 7).plus_weeks(w);
        for (const char* geo : {"GA", "AL", "NY"}) {
            ili += sat.to_string() + "," + geo + ",2.5\n";
        }
    }
    RunConfig cfg;
    cfg.cases_csv = dir.file("cases.csv", cases);
    cfg.ili_csv = dir.file("ili.csv", ili);
    cfg.trends_csv = dir.file("trends.csv", trends);
    return cfg;
}

}  // namespace

TEST_CASE("well-formed fixture loads with three states") {
    TempDir dir;
    RunConfig cfg = fixture_config(dir);
    LoadReport rep;
    DatasetBundle b = load_bundle(cfg, &rep);
    CHECK(rep.n_states == 3);
    CHECK(rep.cases_rows == 42);
    CHECK(rep.ili_rows == 6);
    CHECK(b.state_ids() == std::vector<std::string>{"AL", "GA", "NY"});
    // Built-in US regions: GA and AL share R4, NY sits in R2.
    CHECK(b.neighbors_of("GA") == std::vector<std::string>{"AL", "GA"});
    CHECK(b.neighbors_of("NY") == std::vector<std::string>{"NY"});
    CHECK(b.geo("GA").region_of == std::string("R4"));
    CHECK(b.nation_id() == "US");
}

TEST_CASE("ILI dated off-Saturday rejects with location") {
    TempDir dir;
    RunConfig cfg = fixture_config(dir);
    cfg.ili_csv = dir.file("bad_ili.csv",
                           "week_ending,geo,ili_pct\n2020-03-04,GA,2.5\n");  // Wednesday
    try {
        load_bundle(cfg);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("Saturday") != std::string::npos);
    }
}

TEST_CASE("duplicate (date,geo) row rejects") {
    TempDir dir;
    RunConfig cfg = fixture_config(dir);
    cfg.cases_csv = dir.file("dup.csv",
                             "date,geo,cases,deaths\n"
                             "2020-03-01,GA,1,0\n"
                             "2020-03-01,GA,2,0\n");
    CHECK_THROWS_AS(load_bundle(cfg), ParseError);
}

TEST_CASE("missing interior date rejects") {
    TempDir dir;
    RunConfig cfg = fixture_config(dir);
    cfg.cases_csv = dir.file("gap.csv",
                             "date,geo,cases,deaths\n"
                             "2020-03-01,GA,1,0\n"
                             "2020-03-03,GA,2,0\n");
    CHECK_THROWS_AS(load_bundle(cfg), Error);
}

TEST_CASE("negative counts and malformed numbers reject") {
    TempDir dir;
    RunConfig cfg = fixture_config(dir);
    cfg.cases_csv = dir.file("neg.csv", "date,geo,cases,deaths\n2020-03-01,GA,-1,0\n");
    CHECK_THROWS_AS(load_bundle(cfg), ParseError);
    cfg = fixture_config(dir);
    cfg.cases_csv = dir.file("nan.csv", "date,geo,cases,deaths\n2020-03-01,GA,abc,0\n");
    CHECK_THROWS_AS(load_bundle(cfg), ParseError);
}

TEST_CASE("unknown geo without geography file rejects; file fixes it") {
    TempDir dir;
    RunConfig cfg = fixture_config(dir);
    cfg.cases_csv = dir.file("weird.csv", "date,geo,cases,deaths\n2020-03-01,ZZ,1,0\n");
    CHECK_THROWS_AS(load_bundle(cfg), Error);
    cfg.geography_csv = dir.file("geo.csv", "geo,region\nZZ,R1\nGA,R4\nAL,R4\nNY,R2\n");
    DatasetBundle b = load_bundle(cfg);
    CHECK(b.geo("ZZ").region_of == std::string("R1"));
}

TEST_CASE("trend frequency detected per (geo, term) and kept uniform per term") {
    TempDir dir;
    RunConfig cfg = fixture_config(dir);
    std::string weekly = "date,geo,term,value\n";
    for (int w = 0; w < 3; ++w) {
        weekly += Date(2020, 3, 7).plus_weeks(w).to_string() + ",GA,flu q,7\n";
    }
    cfg.trends_csv = dir.file("weekly.csv", weekly);
    DatasetBundle b = load_bundle(cfg);
    CHECK_FALSE(b.trends.at({"GA", "flu q"}).is_daily());

    // Same term daily in one state and weekly in another is rejected.
    std::string mixed = weekly;
    for (int d = 0; d < 10; ++d) {
        mixed += Date(2020, 3, 1).plus_days(d).to_string() + ",AL,flu q,3\n";
    }
    cfg.trends_csv = dir.file("mixed.csv", mixed);
    CHECK_THROWS_AS(load_bundle(cfg), Error);
}

TEST_CASE("level accessors aggregate states") {
    TempDir dir;
    DatasetBundle b = load_bundle(fixture_config(dir));
    DailySeries us = daily_at_level(b, "US", SignalKind::Cases);
    CHECK(us[0] == doctest::Approx(30.0));  // three states x 10
    DailySeries r4 = daily_at_level(b, "R4", SignalKind::Cases);
    CHECK(r4[0] == doctest::Approx(20.0));  // GA + AL
    WeeklySeries ili_us = ili_at_level(b, "US");
    CHECK(ili_us[0] == doctest::Approx(2.5));  // mean of equal states
    TrendSeries t = trend_at_level(b, "R4", "fever");
    REQUIRE(t.is_daily());
    CHECK((*t.daily)[0] == doctest::Approx(10.0));
}

TEST_CASE("bundle view truncates at the as-of date") {
    TempDir dir;
    DatasetBundle b = load_bundle(fixture_config(dir));
    BundleView v(b, Date(2020, 3, 7));
    CHECK(v.daily("GA", SignalKind::Cases).end() == Date(2020, 3, 7));
    CHECK(v.ili("GA").size() == 1);
    CHECK_THROWS_AS(BundleView(b, Date(2020, 3, 9)), Error);  // not a Saturday
}

TEST_CASE("forecast table round-trips bit-exactly and stays sorted") {
    TempDir dir;
    ForecastTable t;
    t.add({"GA", Date(2020, 7, 4), 1, "naive-cases", 123.4567891234567e-3});
    t.add({"AL", Date(2020, 7, 11), 2, "argo-joint-cases", 1.0 / 3.0});
    t.add({"AL", Date(2020, 7, 4), 1, "argo-joint-cases", 9876543.21});
    std::string p1 = (dir.path / "f1.csv").string();
    std::string p2 = (dir.path / "f2.csv").string();
    write_forecasts(t, p1);
    ForecastTable r = read_forecasts(p1);
    write_forecasts(r, p2);
    std::ifstream f1(p1), f2(p2);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
    auto rows = r.rows();
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].geo == "AL");
    CHECK(rows[0].target_week == Date(2020, 7, 4));
    CHECK(rows[2].geo == "GA");
    CHECK(rows[1].value == 1.0 / 3.0);  // bit-exact round trip

    // Duplicate keys reject.
    ForecastRow dup{"GA", Date(2020, 7, 4), 1, "naive-cases", 1.0};
    CHECK_THROWS_AS(t.add(dup), Error);

    // Empty table gives a header-only file.
    ForecastTable empty;
    std::string p3 = (dir.path / "empty.csv").string();
    write_forecasts(empty, p3);
    std::ifstream f3(p3);
    std::string s3((std::istreambuf_iterator<char>(f3)), {});
    CHECK(s3 == "geo,target_week,horizon,method,value\n");
    CHECK(read_forecasts(p3).empty());
}

TEST_CASE("config json round trip and validation") {
    TempDir dir;
    RunConfig cfg;
    cfg.seed = 42;
    cfg.cases_csv = "a.csv";
    cfg.ili_csv = "b.csv";
    cfg.trends_csv = "c.csv";
    std::string path = dir.file("cfg.json", cfg.to_json());
    RunConfig back = RunConfig::load_json(path);
    CHECK(back.seed == 42);
    CHECK(back.imputation_draws == 100);
    CHECK(back.national_train_days == 56);
    CHECK(back.state_train_weeks == 30);
    CHECK(back.ensemble_window_weeks == 15);
    CHECK(back.config_hash() == cfg.config_hash());

    // Thread count must not affect the config hash.
    RunConfig threaded = cfg;
    threaded.threads = 7;
    CHECK(threaded.config_hash() == cfg.config_hash());

    CHECK_THROWS_AS(RunConfig::load_json(dir.file("bad.json", "{\"nope\": 1}")), Error);
    RunConfig bad = cfg;
    bad.imputation_draws = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.national_train_days = 10;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.lambda_grid = {0.5, 0.1};
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("lag table csv round trip and shipped defaults") {
    TempDir dir;
    LagTable t = LagTable::builtin_default();
    CHECK(t.terms.size() == 23);
    CHECK(t.terms.at("loss of taste").case_lag == 11);
    CHECK(t.terms.at("loss of taste").death_lag == 24);
    std::string path = (dir.path / "lags.csv").string();
    t.save_csv(path);
    LagTable back = LagTable::load_csv(path);
    CHECK(back.terms.size() == t.terms.size());
    CHECK(back.terms.at("fever").case_lag == 4);
    CHECK(back.terms.at("covid 19 vaccine").death_lag == 7);
}
