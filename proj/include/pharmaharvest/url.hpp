#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace pharmaharvest {

struct Url {
    std::string scheme;  ///< lowercase, "http" or "https"
    std::string host;    ///< lowercase
    int port = 0;        ///< explicit or scheme default
    std::string target;  ///< path plus query, always begins with '/'

    /// "host" or "host:port" when the port is not the scheme default.
    std::string authority() const;
    /// "scheme://authority"
    std::string origin() const;
    std::string str() const { return origin() + target; }
    /// Target without the query string.
    std::string path() const;
};

/// Absolute http(s) URLs only; throws InvalidArgument otherwise.
Url parse_url(std::string_view text);

/// Resolves an href against a base URL (absolute, scheme-relative,
/// root-relative, query-only and document-relative forms).
std::string resolve_url(std::string_view base, std::string_view href);

}  // namespace pharmaharvest
