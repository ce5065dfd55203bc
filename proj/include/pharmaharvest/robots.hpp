#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace pharmaharvest::fetch {

struct RobotsVerdict {
    bool allowed = true;
    std::optional<std::string> matched_rule;  ///< e.g. "Disallow: /private/"
    bool robots_present = false;

    bool operator==(const RobotsVerdict&) const = default;
};

/// Robots exclusion check in the RFC 9309 style:
///  - the group whose user-agent token equals the crawler's product token
///    (case-insensitive) applies, otherwise the "*" group(s);
///  - among matching Allow/Disallow rules the longest pattern wins, with
///    Allow winning ties; "*" and a trailing "$" are honoured;
///  - an absent document allows everything.
/// Malformed lines are skipped. `path` must begin with '/' (it may carry a
/// query string).
RobotsVerdict check_robots(const std::optional<std::string>& robots_document, std::string_view user_agent,
                           std::string_view path);

/// Leading product token of a User-Agent string ("pharmaharvest/0.1 (...)"
/// -> "pharmaharvest").
std::string product_token(std::string_view user_agent);

}  // namespace pharmaharvest::fetch
