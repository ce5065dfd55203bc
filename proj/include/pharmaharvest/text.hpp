#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pharmaharvest::text {

std::string_view trim(std::string_view s);
/// Trims and replaces every internal whitespace run with a single space.
std::string collapse_whitespace(std::string_view s);
/// ASCII lowercase.
std::string lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

/// Canonical drug label: collapsed whitespace, each word title-cased
/// ("ATORVASTATIN  calcium" -> "Atorvastatin Calcium").
std::string normalize_drug_label(std::string_view raw);

/// Matching key for labels: collapsed whitespace, lowercased.
std::string label_key(std::string_view label);

/// Lowercase ASCII with hyphens; runs of anything else collapse to one
/// hyphen, never empty ("January - March 2025" -> "january-march-2025").
std::string slug(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

}  // namespace pharmaharvest::text
