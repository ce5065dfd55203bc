#pragma once

#include "pharmaharvest/types.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace pharmaharvest::adapters {

/// The seven supported databases, in SourceId order.
const std::vector<SourceDescriptor>& list_sources();
const SourceDescriptor& describe(SourceId id);

/// Entry points the search adapters drive. `term` is percent-encoded.
std::string search_url(SourceId id, std::string_view term);

inline constexpr std::string_view kFaersIndexUrl = "https://fis.fda.gov/extensions/FPD-QDE-FAERS/FPD-QDE-FAERS.html";
inline constexpr std::string_view kVaersIndexUrl = "https://vaers.hhs.gov/data/datasets.html";

/// RFC 3986 percent-encoding of everything outside the unreserved set.
std::string percent_encode(std::string_view s);

}  // namespace pharmaharvest::adapters
