#pragma once

// Column-oriented records and their CSV / NDJSON renderings.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace qdnuc {

using Cell = std::variant<double, std::int64_t, bool, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

/// `precision` significant digits, shortest form ("%.{p}g"); nan/inf spelled out.
[[nodiscard]] std::string format_number(double v, int precision);

/// Header line then one line per row. Strings containing a comma or quote are quoted.
[[nodiscard]] std::string to_csv(const Table& t, int precision);

/// One JSON object per row. Numbers are rounded to `precision` significant
/// digits; non-finite numbers become null.
[[nodiscard]] std::string to_ndjson(const Table& t, int precision);

}  // namespace qdnuc
