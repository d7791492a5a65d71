#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tabsynth {

// Column is typed at ingestion: every cell is either text or a finite number.
struct Column {
    std::string name;
    bool text = false;
    std::vector<double> nums;
    std::vector<std::string> texts;

    std::size_t size() const { return text ? texts.size() : nums.size(); }
};

struct RawTable {
    std::vector<Column> cols;
    std::size_t rows = 0;

    std::size_t find_col(const std::string& name) const {
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i].name == name) return i;
        throw std::invalid_argument("no column named '" + name + "'");
    }

    bool has_col(const std::string& name) const {
        for (const auto& c : cols)
            if (c.name == name) return true;
        return false;
    }

    void validate() const {
        for (const auto& c : cols) {
            if (c.size() != rows)
                throw std::invalid_argument("column '" + c.name + "' has " +
                                            std::to_string(c.size()) + " cells, table has " +
                                            std::to_string(rows) + " rows");
            if (!c.text)
                for (double v : c.nums)
                    if (!std::isfinite(v))
                        throw std::invalid_argument("column '" + c.name + "' has non-finite cell");
        }
    }
};

inline RawTable take_table_rows(const RawTable& t, const std::vector<std::size_t>& idx) {
    RawTable out;
    out.rows = idx.size();
    out.cols.reserve(t.cols.size());
    for (const auto& c : t.cols) {
        Column nc;
        nc.name = c.name;
        nc.text = c.text;
        if (c.text) {
            nc.texts.reserve(idx.size());
            for (std::size_t i : idx) nc.texts.push_back(c.texts.at(i));
        } else {
            nc.nums.reserve(idx.size());
            for (std::size_t i : idx) nc.nums.push_back(c.nums.at(i));
        }
        out.cols.push_back(std::move(nc));
    }
    return out;
}

}  // namespace tabsynth
