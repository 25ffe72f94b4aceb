#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "argo/backtest.hpp"
#include "argo/csv.hpp"
#include "argo/synthetic.hpp"

namespace fs = std::filesystem;
using namespace argo;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

RunConfig load_config(const GlobalOpts& g) {
    try {
        if (g.config_path.empty()) throw Error("--config is required for this command");
        RunConfig cfg = RunConfig::load_json(g.config_path);
        if (g.seed) cfg.seed = *g.seed;
        if (g.threads) cfg.threads = *g.threads;
        cfg.validate();
        return cfg;
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
}

void write_manifest(const GlobalOpts& g, const RunConfig* cfg, const std::string& command,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    nlohmann::json j;
    j["command"] = command;
    if (cfg) {
        j["config_hash"] = cfg->config_hash();
        j["seed"] = cfg->seed;
    }
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    std::ofstream out(fs::path(g.out_dir) / "manifest.json");
    if (!out) throw Error("cannot write manifest under " + g.out_dir);
    out << j.dump(2) << "\n";
}

std::vector<std::string> data_inputs(const RunConfig& cfg) {
    std::vector<std::string> in{cfg.cases_csv, cfg.ili_csv, cfg.trends_csv};
    if (!cfg.geography_csv.empty()) in.push_back(cfg.geography_csv);
    if (!cfg.lag_table_csv.empty()) in.push_back(cfg.lag_table_csv);
    return in;
}

Date parse_saturday(const std::string& s, const char* flag) {
    try {
        Date d = Date::parse(s);
        if (!d.is_saturday()) {
            throw Error(std::string(flag) + " " + s + " must be a Saturday (week ending)");
        }
        return d;
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
}

int cmd_simulate(const GlobalOpts& g, const std::string& scenario_path) {
    SyntheticScenario sc;
    try {
        sc = SyntheticScenario::load_json(scenario_path);
        if (g.seed) sc.seed = *g.seed;
        sc.validate();
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
    DatasetBundle bundle = generate_synthetic(sc);
    fs::create_directories(g.out_dir);
    fs::path out(g.out_dir);
    write_cases_csv(bundle, (out / "cases.csv").string());
    write_ili_csv(bundle, (out / "ili.csv").string());
    write_trends_csv(bundle, (out / "trends.csv").string());
    write_geography_csv(bundle, (out / "geography.csv").string());

    // Ready-to-run config pointing at the generated files.
    RunConfig cfg;
    cfg.seed = sc.seed;
    cfg.cases_csv = (out / "cases.csv").string();
    cfg.ili_csv = (out / "ili.csv").string();
    cfg.trends_csv = (out / "trends.csv").string();
    cfg.geography_csv = (out / "geography.csv").string();
    {
        std::ofstream f(out / "config.json");
        f << cfg.to_json() << "\n";
    }
    write_manifest(g, &cfg, "simulate", {scenario_path},
                   {"cases.csv", "ili.csv", "trends.csv", "geography.csv", "config.json"});
    std::cerr << "simulated " << sc.n_states << " states x " << sc.weeks << " weeks -> "
              << g.out_dir << "\n";
    return 0;
}

int cmd_impute(const GlobalOpts& g, const std::string& as_of_str, const std::string& geo) {
    RunConfig cfg = load_config(g);
    DatasetBundle bundle = load_bundle(cfg);
    Date as_of = as_of_str.empty()
                     ? truth_weekly(bundle, bundle.nation_id(), Target::Ili).last_week()
                     : parse_saturday(as_of_str, "--as-of");
    BundleView view(bundle, as_of);
    ImputationOptions opt;
    opt.draws = cfg.imputation_draws;
    opt.include_current = cfg.donor_include_current;
    opt.first_eligible_week = cfg.first_eligible_week;
    fs::create_directories(g.out_dir);
    std::vector<std::string> outputs;
    std::vector<std::string> geos;
    if (!geo.empty()) geos.push_back(geo);
    else {
        geos = view.state_ids();
        geos.push_back(view.nation_id());
    }
    for (const std::string& gid : geos) {
        ImputationSet set = impute_area(view.ili(gid), view.daily(gid, SignalKind::Cases),
                                        opt, cfg.seed);
        std::string name = "imputed_" + gid + ".csv";
        write_imputation_csv(set, (fs::path(g.out_dir) / name).string());
        outputs.push_back(name);
    }
    write_manifest(g, &cfg, "impute", data_inputs(cfg), outputs);
    return 0;
}

int cmd_fit_national(const GlobalOpts& g, const std::string& signal,
                     const std::string& as_of_str) {
    RunConfig cfg = load_config(g);
    Target target = parse_target(signal);
    DatasetBundle bundle = load_bundle(cfg);
    Date as_of = parse_saturday(as_of_str, "--as-of");
    BundleView view(bundle, as_of);
    fs::create_directories(g.out_dir);

    ForecastTable table;
    if (target == Target::Ili) {
        table = forecast_national_ili(view, cfg, as_of);
    } else {
        RunConfig one = cfg;
        one.targets = {target};
        Pipeline pipe(bundle, one, as_of);
        table = forecast_national(view, pipe.imputations(as_of)->at(view.nation_id()),
                                  cfg, as_of, target, pipe.lags());
    }
    write_forecasts(table, (fs::path(g.out_dir) / "forecasts.csv").string());
    write_manifest(g, &cfg, "fit-national", data_inputs(cfg), {"forecasts.csv"});
    return 0;
}

int cmd_fit_state(const GlobalOpts& g, const std::string& target_str,
                  const std::string& as_of_str, bool dump_cov) {
    RunConfig cfg = load_config(g);
    Target target = parse_target(target_str);
    DatasetBundle bundle = load_bundle(cfg);
    Date as_of = parse_saturday(as_of_str, "--as-of");
    BundleView view(bundle, as_of);
    RunConfig one = cfg;
    one.targets = {target};
    Pipeline pipe(bundle, one, as_of);
    fs::create_directories(g.out_dir);

    std::map<std::string, CovarianceSpec> specs;
    static const std::map<std::string, ImputationSet> kEmpty;
    ForecastTable table = forecast_state(
        view, pipe.raw(),
        target == Target::Ili ? kEmpty : *pipe.imputations(as_of), cfg, as_of, target,
        dump_cov ? &specs : nullptr);
    write_forecasts(table, (fs::path(g.out_dir) / "forecasts.csv").string());
    std::vector<std::string> outputs{"forecasts.csv"};
    if (dump_cov) {
        write_covariance_csv(specs, (fs::path(g.out_dir) / "covariance.csv").string());
        outputs.push_back("covariance.csv");
    }
    write_manifest(g, &cfg, "fit-state", data_inputs(cfg), outputs);
    return 0;
}

int cmd_backtest(const GlobalOpts& g, const std::string& start_str,
                 const std::string& end_str, const std::string& command_name) {
    RunConfig cfg = load_config(g);
    DatasetBundle bundle = load_bundle(cfg);
    Date start = parse_saturday(start_str, "--start");
    Date end = end_str.empty() ? start : parse_saturday(end_str, "--end");
    BacktestResult result = run_backtest(bundle, cfg, start, end);
    fs::create_directories(g.out_dir);
    fs::path out(g.out_dir);
    write_forecasts(result.forecasts, (out / "forecasts.csv").string());
    write_metrics_csv(result.report, (out / "metrics.csv").string());
    write_selections_csv(result.selections, (out / "selections.csv").string());
    write_series_csv(result.forecasts, bundle, (out / "series.csv").string());
    write_manifest(g, &cfg, command_name, data_inputs(cfg),
                   {"forecasts.csv", "metrics.csv", "selections.csv", "series.csv"});
    return 0;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& forecasts_path) {
    RunConfig cfg = load_config(g);
    DatasetBundle bundle = load_bundle(cfg);
    ForecastTable table = read_forecasts(forecasts_path);
    if (table.empty()) throw Error("evaluate: empty forecast table");
    Pipeline pipe(bundle, cfg, truth_weekly(bundle, bundle.nation_id(), Target::Ili).last_week());

    // Score over the as-of span implied by the table.
    std::optional<Date> lo, hi;
    for (const ForecastRow& r : table.rows()) {
        Date asof = r.target_week.plus_weeks(-r.horizon);
        if (!lo || asof < *lo) lo = asof;
        if (!hi || asof > *hi) hi = asof;
    }
    BacktestResult scored;
    MetricReport report;
    {
        // Reuse the scoring join from the backtest via its public pieces.
        TruthLookup truth = pipe.truth_lookup();
        struct Acc {
            std::vector<double> pred, actual;
        };
        std::map<std::tuple<std::string, std::string, int>, Acc> groups;
        for (const ForecastRow& r : table.rows()) {
            Target target = Target::Cases;
            if (r.method.ends_with("-deaths")) target = Target::Deaths;
            else if (r.method.ends_with("-ili")) target = Target::Ili;
            auto actual = truth(r.geo, target, r.target_week);
            if (!actual) continue;
            auto& acc = groups[{r.geo, r.method, r.horizon}];
            acc.pred.push_back(r.value);
            acc.actual.push_back(*actual);
        }
        for (const auto& [key, acc] : groups) {
            MetricRow row;
            row.geo = std::get<0>(key);
            row.method = std::get<1>(key);
            row.horizon = std::get<2>(key);
            row.rmse_v = rmse(acc.pred, acc.actual);
            row.mae_v = mae(acc.pred, acc.actual);
            row.corr = acc.pred.size() >= 2 ? pearson(acc.pred, acc.actual) : std::nullopt;
            row.n = static_cast<int>(acc.pred.size());
            report.rows.push_back(row);
        }
    }
    fs::create_directories(g.out_dir);
    write_metrics_csv(report, (fs::path(g.out_dir) / "metrics.csv").string());
    auto inputs = data_inputs(cfg);
    inputs.push_back(forecasts_path);
    write_manifest(g, &cfg, "evaluate", inputs, {"metrics.csv"});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint influenza/COVID forecasting toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "Run configuration JSON");
    app.add_option("--out", g.out_dir, "Output directory");
    std::uint64_t seed_val = 0;
    auto* seed_opt = app.add_option("--seed", seed_val, "Override the config seed");
    int threads_val = 0;
    auto* threads_opt =
        app.add_option("--threads", threads_val, "Worker threads (0 = logical cores)");

    auto* sim = app.add_subcommand("simulate", "Generate a synthetic twin-epidemic panel");
    std::string scenario_path;
    sim->add_option("--scenario", scenario_path, "Scenario JSON")->required();

    auto* imp = app.add_subcommand("impute", "Dump imputed daily ILI draws");
    std::string imp_asof, imp_geo;
    imp->add_option("--as-of", imp_asof, "Saturday cutoff (defaults to last ILI week)");
    imp->add_option("--geo", imp_geo, "Single geography id");

    auto* fn = app.add_subcommand("fit-national", "National forecasts at one as-of date");
    std::string fn_signal, fn_asof;
    fn->add_option("--signal", fn_signal, "cases|deaths|ili")->required();
    fn->add_option("--as-of", fn_asof, "Saturday as-of date")->required();

    auto* fs_cmd = app.add_subcommand("fit-state", "State-level forecasts at one as-of date");
    std::string fs_target, fs_asof;
    bool fs_dump_cov = false;
    fs_cmd->add_option("--target", fs_target, "cases|deaths|ili")->required();
    fs_cmd->add_option("--as-of", fs_asof, "Saturday as-of date")->required();
    fs_cmd->add_flag("--dump-cov", fs_dump_cov, "Write per-state covariance parameters");

    auto* ens = app.add_subcommand("ensemble", "Winner-takes-all forecasts at one as-of date");
    std::string ens_asof;
    ens->add_option("--as-of", ens_asof, "Saturday as-of date")->required();

    auto* bt = app.add_subcommand("backtest", "Rolling retrospective evaluation");
    std::string bt_start, bt_end;
    bt->add_option("--start", bt_start, "First as-of Saturday")->required();
    bt->add_option("--end", bt_end, "Last as-of Saturday")->required();

    auto* ev = app.add_subcommand("evaluate", "Score an existing forecast CSV");
    std::string ev_forecasts;
    ev->add_option("--forecasts", ev_forecasts, "Forecast CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (seed_opt->count()) g.seed = seed_val;
    if (threads_opt->count()) g.threads = threads_val;

    try {
        if (sim->parsed()) return cmd_simulate(g, scenario_path);
        if (imp->parsed()) return cmd_impute(g, imp_asof, imp_geo);
        if (fn->parsed()) return cmd_fit_national(g, fn_signal, fn_asof);
        if (fs_cmd->parsed()) return cmd_fit_state(g, fs_target, fs_asof, fs_dump_cov);
        if (ens->parsed()) return cmd_backtest(g, ens_asof, "", "ensemble");
        if (bt->parsed()) return cmd_backtest(g, bt_start, bt_end, "backtest");
        if (ev->parsed()) return cmd_evaluate(g, ev_forecasts);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
