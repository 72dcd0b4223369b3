// Copyright 2026 The bdrlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bdr {

using CsvRow = std::vector<std::string>;

/// Quotes a field when it holds a comma, quote, CR or LF (RFC 4180).
[[nodiscard]] std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, std::span<const std::string> fields);

/// RFC 4180 reader; accepts LF or CRLF line ends. Throws DataError on an
/// unterminated quoted field.
[[nodiscard]] std::vector<CsvRow> parse_csv(std::istream& in);
[[nodiscard]] std::vector<CsvRow> parse_csv(std::string_view text);

/// Shortest text that reads back to the same double; "inf", "-inf", "nan".
[[nodiscard]] std::string format_double(double v);
/// Inverse of format_double(). Throws DataError on malformed text.
[[nodiscard]] double parse_double(std::string_view text);

}  // namespace bdr
