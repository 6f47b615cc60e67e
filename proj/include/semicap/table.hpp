// Tabular output as CSV or JSON lines.
//
// Doubles are printed in the shortest form that parses back to the same
// bits, so a written table re-reads exactly. Non-finite values appear as
// inf, -inf and nan in CSV and as null in JSON.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace semicap {

using Cell = std::variant<std::string, double, std::int64_t, std::uint64_t, bool>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    // Throws InvalidArgument when the row width differs from the header.
    void add(std::vector<Cell> row);
};

std::string format_double(double v);
double parse_double(std::string_view text);
std::string format_cell(const Cell& c);

// Comment (without the leading "# ") first, then the header, then rows.
void write_csv(std::ostream& out, const Table& table, std::string_view comment);
// A {"meta": comment} line, then one object per row.
void write_jsonl(std::ostream& out, const Table& table, std::string_view comment);

struct ParsedCsv {
    std::string comment;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

ParsedCsv parse_csv(std::istream& in);

} // namespace semicap
