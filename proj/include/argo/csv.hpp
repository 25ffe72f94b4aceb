#pragma once

#include <functional>
#include <string>
#include <vector>

#include "argo/util.hpp"

namespace argo {

/// Minimal strict CSV reader for the toolkit's fixed schemas: comma
/// separated, no quoting, exact header match, every rejection carries
/// file/line/column.
class CsvReader {
public:
    CsvReader(std::string path, std::vector<std::string> expected_header);

    /// Calls fn(fields, line_number) for every data row.
    void for_each_row(
        const std::function<void(const std::vector<std::string_view>&, std::size_t)>& fn);

    [[noreturn]] void fail(std::size_t line, std::size_t column,
                           const std::string& msg) const {
        throw ParseError(path_, line, column, msg);
    }

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::vector<std::string> header_;
    std::string content_;
};

class CsvWriter {
public:
    CsvWriter(std::string path, const std::vector<std::string>& header);
    ~CsvWriter();

    void row(const std::vector<std::string>& fields);
    void close();

private:
    std::string path_;
    std::string buffer_;
    std::size_t n_fields_;
    bool closed_ = false;
};

}  // namespace argo
