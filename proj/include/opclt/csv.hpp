// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace opclt {

using Cell = std::variant<std::string, double, long long>;

/// Rectangular table with a header row.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

/// Shortest decimal that parses back to the same double (at most 17
/// significant digits); "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

/// RFC 4180 CSV text with LF line endings.
std::string to_csv(const Table& table);

/// Writes to_csv(table) to `path`; throws std::runtime_error on I/O failure
/// and std::invalid_argument on a ragged table.
void emit_csv(const Table& table, const std::filesystem::path& path);

}  // namespace opclt
