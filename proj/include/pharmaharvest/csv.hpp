#pragma once

#include "pharmaharvest/types.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pharmaharvest::csv {

using Row = std::vector<std::string>;

/// RFC 4180: fields containing comma, quote, CR or LF are quoted, quotes
/// doubled. Rows end with CRLF.
std::string format_row(std::span<const std::string> fields);

/// Parses a whole document. Accepts CRLF or LF line endings. A trailing
/// newline does not produce an empty row. Throws ParseError on an
/// unterminated quoted field.
std::vector<Row> parse(std::string_view document);

inline constexpr std::string_view kRecordHeader = "source,drug,soc,reaction,count,retrieved_at,adapter_version";

/// Canonical export: header plus one row per record, sorted by
/// (drug, soc, reaction). Output is a pure function of the record set.
std::string write_records(std::span<const CountRecord> records);

/// Inverse of write_records. raw_drug is set to drug. Throws ParseError on
/// a header mismatch or malformed row.
std::vector<CountRecord> read_records(std::string_view document);

}  // namespace pharmaharvest::csv
