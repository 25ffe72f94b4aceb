#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "argo/bundle.hpp"
#include "argo/forecast_table.hpp"

namespace argo {

/// A named forecaster. `fn` emits rows for every (geo, horizon) it covers at
/// the given as-of date; the table method strings are `<name>-<target>`.
struct Constituent {
    std::string name;
    std::function<ForecastTable(const BundleView&, const RunConfig&, Date)> fn;
};

/// Ordered registry; registration order breaks selection ties. The built-ins
/// are "argo-national-disagg", "argox-idv", "naive" and "state-gt-raw";
/// external methods (e.g. argox-2step, argox-natconstraint) plug in through
/// add().
class ConstituentRegistry {
public:
    void add(Constituent c);
    const std::vector<Constituent>& constituents() const { return entries_; }
    std::vector<std::string> names() const;

private:
    std::vector<Constituent> entries_;
};

struct SelectionKey {
    std::string geo;
    Target target = Target::Cases;
    int horizon = 1;
};

struct SelectionEntry {
    SelectionKey key;
    std::string chosen;                       // base constituent name
    std::vector<std::pair<std::string, double>> window_mse;  // registry order
    Date window_start, window_end;            // target weeks covered
    std::vector<std::string> warnings;        // excluded methods
};

using TruthLookup =
    std::function<std::optional<double>(const std::string& geo, Target, Date week)>;

/// Trailing-window MSE selection at one key: exactly `window_weeks` target
/// weeks ending at as_of, argmin over methods present for the whole window.
SelectionEntry select(const ForecastTable& history, const TruthLookup& truth,
                      const std::vector<std::string>& method_order, int window_weeks,
                      const SelectionKey& key, Date as_of);

/// Winner-takes-all rows (method `argox-joint-ensemble-<target>`): the chosen
/// constituent's current forecast copied verbatim.
ForecastTable forecast_ensemble(const ForecastTable& history, const ForecastTable& current,
                                const TruthLookup& truth,
                                const std::vector<std::string>& method_order,
                                const RunConfig& cfg, const std::vector<std::string>& states,
                                Date as_of, std::vector<SelectionEntry>* selections_out);

void write_selections_csv(const std::vector<SelectionEntry>& entries,
                          const std::string& path);

}  // namespace argo
