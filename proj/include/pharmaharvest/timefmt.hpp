#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace pharmaharvest {

/// UTC wall-clock instant with millisecond resolution.
using Timestamp = std::chrono::time_point<std::chrono::system_clock, std::chrono::milliseconds>;

/// RFC 3339 in UTC, e.g. "2025-04-02T08:15:00Z"; fractional seconds are
/// emitted only when nonzero.
std::string format_rfc3339(Timestamp t);

/// Accepts "Z" or a numeric offset; throws ParseError.
Timestamp parse_rfc3339(std::string_view text);

/// Filename-safe compact form, e.g. "20250402T081500Z".
std::string format_compact(Timestamp t);

Timestamp utc_now();

}  // namespace pharmaharvest
