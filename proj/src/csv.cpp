// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0

#include "opclt/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace opclt {

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

namespace {

std::string quote_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string render(const Cell& cell)
{
    struct Visitor {
        std::string operator()(const std::string& s) const { return quote_field(s); }
        std::string operator()(double v) const { return format_double(v); }
        std::string operator()(long long v) const { return std::to_string(v); }
    };
    return std::visit(Visitor{}, cell);
}

}  // namespace

std::string to_csv(const Table& table)
{
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i)
            out += ',';
        out += quote_field(table.header[i]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw std::invalid_argument("to_csv: row width " + std::to_string(row.size()) +
                                        " does not match header width " +
                                        std::to_string(table.header.size()));
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                out += ',';
            out += render(row[i]);
        }
        out += '\n';
    }
    return out;
}

void emit_csv(const Table& table, const std::filesystem::path& path)
{
    const std::string text = to_csv(table);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw std::runtime_error("emit_csv: cannot open " + path.string());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!os)
        throw std::runtime_error("emit_csv: write failed for " + path.string());
}

}  // namespace opclt
