#include "semicap/table.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "semicap/errors.hpp"

namespace semicap {

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

} // namespace

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw InvalidArgument("row width does not match the header");
    }
    rows.push_back(std::move(row));
}

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    if (text == "nan") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (text == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (text == "-inf") {
        return -std::numeric_limits<double>::infinity();
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw InvalidArgument("not a number: '" + std::string(text) + "'");
    }
    return v;
}

std::string format_cell(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else if constexpr (std::is_same_v<T, double>) {
                return format_double(v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else {
                return std::to_string(v);
            }
        },
        c);
}

void write_csv(std::ostream& out, const Table& table, std::string_view comment) {
    out << "# " << comment << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << csv_escape(table.columns[i]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << csv_escape(format_cell(row[i]));
        }
        out << '\n';
    }
}

void write_jsonl(std::ostream& out, const Table& table, std::string_view comment) {
    out << nlohmann::json{{"meta", std::string(comment)}}.dump() << '\n';
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) {
                        if (std::isfinite(v)) {
                            obj[table.columns[i]] = v;
                        } else {
                            obj[table.columns[i]] = nullptr;
                        }
                    } else {
                        obj[table.columns[i]] = v;
                    }
                },
                row[i]);
        }
        out << obj.dump() << '\n';
    }
}

ParsedCsv parse_csv(std::istream& in) {
    ParsedCsv parsed;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line.rfind("# ", 0) == 0 && !header) {
            parsed.comment = line.substr(2);
            continue;
        }
        auto fields = split_csv_line(line);
        if (!header) {
            parsed.columns = std::move(fields);
            header = true;
        } else {
            parsed.rows.push_back(std::move(fields));
        }
    }
    return parsed;
}

} // namespace semicap
