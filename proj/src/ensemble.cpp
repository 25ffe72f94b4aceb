#include "argo/ensemble.hpp"

#include <algorithm>

#include "argo/csv.hpp"
#include "argo/national.hpp"

namespace argo {

void ConstituentRegistry::add(Constituent c) {
    if (c.name.empty()) throw Error("registry: empty constituent name");
    for (const Constituent& e : entries_) {
        if (e.name == c.name) throw Error("registry: duplicate constituent " + c.name);
    }
    entries_.push_back(std::move(c));
}

std::vector<std::string> ConstituentRegistry::names() const {
    std::vector<std::string> out;
    for (const Constituent& e : entries_) out.push_back(e.name);
    return out;
}

SelectionEntry select(const ForecastTable& history, const TruthLookup& truth,
                      const std::vector<std::string>& method_order, int window_weeks,
                      const SelectionKey& key, Date as_of) {
    if (method_order.empty()) throw Error("select: no methods registered");
    SelectionEntry entry;
    entry.key = key;
    entry.window_end = as_of;
    entry.window_start = as_of.plus_weeks(-(window_weeks - 1));

    for (const std::string& base : method_order) {
        const std::string method = method_name(base, key.target);
        double se = 0.0;
        int missing = 0;
        for (int i = 0; i < window_weeks; ++i) {
            Date week = entry.window_start.plus_weeks(i);
            const ForecastRow* row = history.find(key.geo, week, key.horizon, method);
            std::optional<double> actual = truth(key.geo, key.target, week);
            if (!row || !actual) {
                ++missing;
                break;
            }
            double err = row->value - *actual;
            se += err * err;
        }
        if (missing) {
            entry.warnings.push_back("method " + base + " missing forecasts in window at " +
                                     key.geo + " h" + std::to_string(key.horizon));
            continue;
        }
        entry.window_mse.emplace_back(base, se / window_weeks);
    }
    if (entry.window_mse.empty()) {
        throw Error("select: every method lacks window coverage at " + key.geo +
                    " target " + target_name(key.target) + " h" +
                    std::to_string(key.horizon) + " as of " + as_of.to_string());
    }
    // Argmin; earlier registration wins ties.
    const auto* best = &entry.window_mse.front();
    for (const auto& cand : entry.window_mse) {
        if (cand.second < best->second) best = &cand;
    }
    entry.chosen = best->first;
    return entry;
}

ForecastTable forecast_ensemble(const ForecastTable& history, const ForecastTable& current,
                                const TruthLookup& truth,
                                const std::vector<std::string>& method_order,
                                const RunConfig& cfg, const std::vector<std::string>& states,
                                Date as_of, std::vector<SelectionEntry>* selections_out) {
    ForecastTable out;
    for (Target target : cfg.targets) {
        std::vector<int> horizons =
            target == Target::Ili ? std::vector<int>{1} : cfg.horizons;
        for (const std::string& geo : states) {
            for (int h : horizons) {
                SelectionKey key{geo, target, h};
                SelectionEntry entry = select(history, truth, method_order,
                                              cfg.ensemble_window_weeks, key, as_of);
                const ForecastRow* row = current.find(
                    geo, as_of.plus_weeks(h), h, method_name(entry.chosen, target));
                if (!row) {
                    throw Error("ensemble: chosen method " + entry.chosen +
                                " has no current forecast at " + geo);
                }
                out.add({geo, row->target_week, h, method_name("argox-joint-ensemble", target),
                         row->value});
                if (selections_out) selections_out->push_back(std::move(entry));
            }
        }
    }
    return out;
}

void write_selections_csv(const std::vector<SelectionEntry>& entries,
                          const std::string& path) {
    CsvWriter w(path, {"geo", "target", "horizon", "chosen", "method", "mse",
                       "window_start", "window_end"});
    for (const SelectionEntry& e : entries) {
        for (const auto& [method, mse] : e.window_mse) {
            w.row({e.key.geo, target_name(e.key.target), std::to_string(e.key.horizon),
                   e.chosen, method, format_double(mse), e.window_start.to_string(),
                   e.window_end.to_string()});
        }
    }
    w.close();
}

}  // namespace argo
