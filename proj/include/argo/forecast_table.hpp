#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "argo/date.hpp"

namespace argo {

struct ForecastRow {
    std::string geo;
    Date target_week;  // Saturday ending the predicted week
    int horizon = 1;   // weeks ahead
    std::string method;
    double value = 0.0;
};

/// Point forecasts keyed by (geo, target_week, horizon, method). The key is
/// unique and rows iterate in key order.
class ForecastTable {
public:
    void add(ForecastRow row);
    void merge(const ForecastTable& other);

    /// Rows sorted by (geo, target_week, horizon, method).
    std::vector<ForecastRow> rows() const;
    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }

    const ForecastRow* find(const std::string& geo, Date target_week, int horizon,
                            const std::string& method) const;

    std::vector<std::string> methods() const;

private:
    using Key = std::tuple<std::string, long, int, std::string>;
    std::map<Key, ForecastRow> rows_;
};

void write_forecasts(const ForecastTable& t, const std::string& path);
ForecastTable read_forecasts(const std::string& path);

}  // namespace argo
