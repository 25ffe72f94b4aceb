#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace argo {

/// Base error for all validation and runtime failures in the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Flag/config validation failure; maps to exit code 1 in the CLI.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Input/schema violation carrying a file location.
class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, std::size_t column,
               const std::string& msg)
        : Error(file + ":" + std::to_string(line) + ":" + std::to_string(column) +
                ": " + msg),
          file_(file), line_(line), column_(column) {}

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::string file_;
    std::size_t line_;
    std::size_t column_;
};

// Shortest round-trip decimal formatting. All CSV output goes through this so
// that write -> read -> write is a fixpoint and byte-identical across runs.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, bool* ok = nullptr) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    bool good = res.ec == std::errc() && res.ptr == s.data() + s.size();
    if (ok) *ok = good;
    if (!ok && !good) throw Error("bad numeric literal: '" + std::string(s) + "'");
    return v;
}

inline long parse_long(std::string_view s, bool* ok = nullptr) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    bool good = res.ec == std::errc() && res.ptr == s.data() + s.size();
    if (ok) *ok = good;
    if (!ok && !good) throw Error("bad integer literal: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

// FNV-1a, used for RNG substream keys and config hashing.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace argo
