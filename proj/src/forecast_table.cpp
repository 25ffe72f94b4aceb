#include "argo/forecast_table.hpp"

#include <cmath>
#include <set>

#include "argo/csv.hpp"

namespace argo {

namespace {

std::tuple<std::string, long, int, std::string> key_of(const ForecastRow& r) {
    return {r.geo, r.target_week.serial(), r.horizon, r.method};
}

}  // namespace

void ForecastTable::add(ForecastRow row) {
    if (!std::isfinite(row.value)) {
        throw Error("forecast value for " + row.geo + "/" + row.method + " at " +
                    row.target_week.to_string() + " is not finite");
    }
    auto key = key_of(row);
    if (!rows_.emplace(std::move(key), std::move(row)).second) {
        throw Error("duplicate forecast key (" + row.geo + ", " +
                    row.target_week.to_string() + ", " + std::to_string(row.horizon) +
                    ", " + row.method + ")");
    }
}

void ForecastTable::merge(const ForecastTable& other) {
    for (const auto& [_, r] : other.rows_) add(r);
}

std::vector<ForecastRow> ForecastTable::rows() const {
    std::vector<ForecastRow> out;
    out.reserve(rows_.size());
    for (const auto& [_, r] : rows_) out.push_back(r);
    return out;
}

const ForecastRow* ForecastTable::find(const std::string& geo, Date target_week,
                                       int horizon, const std::string& method) const {
    auto it = rows_.find({geo, target_week.serial(), horizon, method});
    if (it == rows_.end()) return nullptr;
    return &it->second;
}

std::vector<std::string> ForecastTable::methods() const {
    std::set<std::string> m;
    for (const auto& [_, r] : rows_) m.insert(r.method);
    return {m.begin(), m.end()};
}

void write_forecasts(const ForecastTable& t, const std::string& path) {
    CsvWriter w(path, {"geo", "target_week", "horizon", "method", "value"});
    for (const ForecastRow& r : t.rows()) {
        w.row({r.geo, r.target_week.to_string(), std::to_string(r.horizon), r.method,
               format_double(r.value)});
    }
    w.close();
}

ForecastTable read_forecasts(const std::string& path) {
    ForecastTable t;
    CsvReader reader(path, {"geo", "target_week", "horizon", "method", "value"});
    reader.for_each_row([&](const std::vector<std::string_view>& f, std::size_t line) {
        ForecastRow r;
        r.geo = std::string(f[0]);
        try {
            r.target_week = Date::parse(f[1]);
        } catch (const Error& e) {
            reader.fail(line, 2, e.what());
        }
        bool ok = false;
        long h = parse_long(f[2], &ok);
        if (!ok || h < 1) reader.fail(line, 3, "horizon must be a positive integer");
        r.horizon = static_cast<int>(h);
        r.method = std::string(f[3]);
        bool okv = false;
        r.value = parse_double(f[4], &okv);
        if (!okv || !std::isfinite(r.value)) reader.fail(line, 5, "value must be finite");
        try {
            t.add(std::move(r));
        } catch (const Error& e) {
            reader.fail(line, 1, e.what());
        }
    });
    return t;
}

}  // namespace argo
