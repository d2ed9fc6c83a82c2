#include "qdnuc/table.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>
#include <json.hpp>

#include "qdnuc/error.hpp"

namespace qdnuc {

void Table::add(std::vector<Cell> row) {
    require(row.size() == columns.size(), "table: row width must match the header");
    rows.push_back(std::move(row));
}

std::string format_number(double v, int precision) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    // Avoid "-0" so equal values print identically.
    if (v == 0.0) v = 0.0;
    return fmt::format("{:.{}g}", v, precision);
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string to_csv(const Table& t, int precision) {
    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c > 0) out += ',';
        out += csv_escape(t.columns[c]);
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += ',';
            std::visit(
                [&](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, double>) {
                        out += format_number(v, precision);
                    } else if constexpr (std::is_same_v<V, bool>) {
                        out += v ? "true" : "false";
                    } else if constexpr (std::is_same_v<V, std::string>) {
                        out += csv_escape(v);
                    } else {
                        out += std::to_string(v);
                    }
                },
                row[c]);
        }
        out += '\n';
    }
    return out;
}

std::string to_ndjson(const Table& t, int precision) {
    std::string out;
    for (const auto& row : t.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::visit(
                [&](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, double>) {
                        if (std::isfinite(v)) {
                            obj[t.columns[c]] = std::strtod(format_number(v, precision).c_str(), nullptr);
                        } else {
                            obj[t.columns[c]] = nullptr;
                        }
                    } else {
                        obj[t.columns[c]] = v;
                    }
                },
                row[c]);
        }
        out += obj.dump();
        out += '\n';
    }
    return out;
}

}  // namespace qdnuc
