#pragma once

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabsynth/table.hpp"

namespace tabsynth {

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal form, used for every number we emit.
inline std::string format_double(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string trim_ws(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

inline bool is_missing_marker(const std::string& cell) {
    return cell.empty() || cell == "?" || cell == "NA" || cell == "NaN" || cell == "nan";
}

// Accepts a cell only if the whole string is one finite number.
inline bool parse_number(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v)) return false;
    out = v;
    return true;
}

// One record, possibly spanning lines when a quoted field embeds newlines.
inline bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool saw_any = false;
    bool quoted_field = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        saw_any = true;
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '\r' && in.peek() == '\n') continue;
        if (c == '"' && field.empty() && !quoted_field) {
            in_quotes = true;
            quoted_field = true;
        } else if (c == ',') {
            fields.push_back(quoted_field ? field : trim_ws(field));
            field.clear();
            quoted_field = false;
        } else if (c == '\n') {
            fields.push_back(quoted_field ? field : trim_ws(field));
            return true;
        } else {
            field.push_back(c);
        }
    }
    if (in_quotes) throw CsvError("unterminated quoted field at end of input");
    if (!saw_any) return false;
    fields.push_back(quoted_field ? field : trim_ws(field));
    return true;
}

}  // namespace detail

struct CsvReadResult {
    RawTable table;
    std::size_t dropped_rows = 0;
};

// Header row required. Rows with missing cells ("", "?", "NA", "NaN") are
// dropped and counted. A column must be all-text or all-numeric across the
// surviving cells.
inline CsvReadResult read_csv_stream(std::istream& in, const std::string& what = "<stream>") {
    std::vector<std::string> header;
    if (!detail::read_record(in, header) || header.empty())
        throw CsvError(what + ": missing header row");
    const std::size_t ncols = header.size();

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> rec;
    std::size_t dropped = 0;
    std::size_t lineno = 1;
    while (detail::read_record(in, rec)) {
        ++lineno;
        if (rec.size() == 1 && rec[0].empty()) continue;
        if (rec.size() != ncols)
            throw CsvError(what + ": row " + std::to_string(lineno) + " has " +
                           std::to_string(rec.size()) + " fields, expected " +
                           std::to_string(ncols));
        bool missing = false;
        for (const auto& cell : rec)
            if (detail::is_missing_marker(cell)) {
                missing = true;
                break;
            }
        if (missing) {
            ++dropped;
            continue;
        }
        rows.push_back(rec);
    }
    if (rows.empty()) throw CsvError(what + ": no usable data rows");

    CsvReadResult out;
    out.dropped_rows = dropped;
    out.table.rows = rows.size();
    out.table.cols.resize(ncols);
    for (std::size_t j = 0; j < ncols; ++j) {
        Column& col = out.table.cols[j];
        col.name = header[j];
        std::size_t numeric = 0;
        std::vector<double> nums(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (detail::parse_number(rows[i][j], nums[i])) ++numeric;
        if (numeric == rows.size()) {
            col.text = false;
            col.nums = std::move(nums);
        } else if (numeric == 0) {
            col.text = true;
            col.texts.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) col.texts[i] = rows[i][j];
        } else {
            throw CsvError(what + ": column '" + header[j] +
                           "' mixes text and numeric cells (" + std::to_string(numeric) + "/" +
                           std::to_string(rows.size()) + " numeric)");
        }
    }
    out.table.validate();
    return out;
}

inline CsvReadResult read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open " + path);
    return read_csv_stream(in, path);
}

namespace detail {

inline void write_csv_field(std::ostream& out, const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

}  // namespace detail

inline void write_csv_stream(std::ostream& out, const RawTable& t) {
    t.validate();
    for (std::size_t j = 0; j < t.cols.size(); ++j) {
        if (j) out << ',';
        detail::write_csv_field(out, t.cols[j].name);
    }
    out << '\n';
    for (std::size_t i = 0; i < t.rows; ++i) {
        for (std::size_t j = 0; j < t.cols.size(); ++j) {
            if (j) out << ',';
            const Column& c = t.cols[j];
            if (c.text)
                detail::write_csv_field(out, c.texts[i]);
            else
                out << format_double(c.nums[i]);
        }
        out << '\n';
    }
}

inline void write_csv(const std::string& path, const RawTable& t) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CsvError("cannot open " + path + " for writing");
    write_csv_stream(out, t);
    if (!out) throw CsvError("write failed for " + path);
}

}  // namespace tabsynth
