#include "argo/csv.hpp"

#include <fstream>
#include <sstream>

namespace argo {

CsvReader::CsvReader(std::string path, std::vector<std::string> expected_header)
    : path_(std::move(path)), header_(std::move(expected_header)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw Error("cannot open " + path_);
    std::ostringstream ss;
    ss << in.rdbuf();
    content_ = ss.str();

    std::size_t eol = content_.find('\n');
    std::string_view first(content_.data(), eol == std::string::npos ? content_.size() : eol);
    if (!first.empty() && first.back() == '\r') first.remove_suffix(1);
    std::string expected;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) expected += ',';
        expected += header_[i];
    }
    if (std::string(first) != expected) {
        throw ParseError(path_, 1, 1,
                         "bad header '" + std::string(first) + "', want '" + expected + "'");
    }
}

void CsvReader::for_each_row(
    const std::function<void(const std::vector<std::string_view>&, std::size_t)>& fn) {
    std::size_t pos = content_.find('\n');
    if (pos == std::string::npos) return;  // header-only file
    ++pos;
    std::size_t line_no = 2;
    while (pos < content_.size()) {
        std::size_t eol = content_.find('\n', pos);
        std::size_t len = (eol == std::string::npos ? content_.size() : eol) - pos;
        std::string_view line(content_.data() + pos, len);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) {
            auto fields = split(line, ',');
            if (fields.size() != header_.size()) {
                fail(line_no, 1,
                     "expected " + std::to_string(header_.size()) + " fields, got " +
                         std::to_string(fields.size()));
            }
            fn(fields, line_no);
        }
        if (eol == std::string::npos) break;
        pos = eol + 1;
        ++line_no;
    }
}

CsvWriter::CsvWriter(std::string path, const std::vector<std::string>& header)
    : path_(std::move(path)), n_fields_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += header[i];
    }
    buffer_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != n_fields_) {
        throw Error("CSV row width mismatch writing " + path_);
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += fields[i];
    }
    buffer_ += '\n';
}

void CsvWriter::close() {
    if (closed_) return;
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path_);
    out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out) throw Error("write failed for " + path_);
    closed_ = true;
}

CsvWriter::~CsvWriter() {
    try {
        close();
    } catch (...) {
        // destructor must not throw; callers wanting the error call close()
    }
}

}  // namespace argo
