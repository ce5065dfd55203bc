#include "pharmaharvest/url.hpp"

#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/text.hpp"

#include <charconv>

namespace pharmaharvest {
namespace {
int default_port(std::string_view scheme) { return scheme == "https" ? 443 : 80; }
}  // namespace

std::string Url::authority() const {
    if (port == default_port(scheme)) return host;
    return host + ":" + std::to_string(port);
}

std::string Url::origin() const { return scheme + "://" + authority(); }

std::string Url::path() const {
    const auto q = target.find('?');
    return q == std::string::npos ? target : target.substr(0, q);
}

Url parse_url(std::string_view text) {
    text = text::trim(text);
    const auto sep = text.find("://");
    if (sep == std::string_view::npos) throw InvalidArgument("not an absolute URL: " + std::string(text));
    Url u;
    u.scheme = text::lower(text.substr(0, sep));
    if (u.scheme != "http" && u.scheme != "https")
        throw InvalidArgument("unsupported URL scheme '" + u.scheme + "'");
    auto rest = text.substr(sep + 3);
    const auto slash = rest.find_first_of("/?#");
    auto authority = rest.substr(0, slash);
    auto target = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);
    if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
    if (authority.empty()) throw InvalidArgument("URL has no host: " + std::string(text));

    u.port = default_port(u.scheme);
    if (const auto colon = authority.rfind(':'); colon != std::string_view::npos && authority.front() != '[') {
        const auto port_text = authority.substr(colon + 1);
        authority = authority.substr(0, colon);
        if (!port_text.empty()) {
            auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), u.port);
            if (ec != std::errc{} || p != port_text.data() + port_text.size() || u.port <= 0 || u.port > 65535)
                throw InvalidArgument("bad port in URL: " + std::string(text));
        }
    }
    u.host = text::lower(authority);
    if (const auto hash = target.find('#'); hash != std::string_view::npos) target = target.substr(0, hash);
    u.target = target.empty() || target.front() != '/' ? "/" + std::string(target) : std::string(target);
    return u;
}

std::string resolve_url(std::string_view base, std::string_view href) {
    href = text::trim(href);
    if (href.find("://") != std::string_view::npos) return std::string(href);
    const Url b = parse_url(base);
    if (href.starts_with("//")) return b.scheme + ":" + std::string(href);
    if (href.empty()) return b.str();
    if (href.front() == '/') return b.origin() + std::string(href);
    if (href.front() == '?') return b.origin() + b.path() + std::string(href);
    if (href.front() == '#') return b.str();

    std::string dir = b.path();
    dir.erase(dir.rfind('/') + 1);
    std::string joined = dir + std::string(href);

    // Collapse "." and ".." segments.
    std::string query;
    if (const auto q = joined.find('?'); q != std::string::npos) {
        query = joined.substr(q);
        joined.erase(q);
    }
    std::vector<std::string> out;
    const auto segments = text::split(joined, '/');
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (s == ".") continue;
        if (s == "..") {
            if (out.size() > 1) out.pop_back();
            continue;
        }
        out.push_back(s);
    }
    std::string path;
    for (std::size_t i = 0; i < out.size(); ++i) path += (i ? "/" : "") + out[i];
    if (path.empty() || path.front() != '/') path.insert(path.begin(), '/');
    if (!segments.empty() && (segments.back() == "." || segments.back() == "..") && path.back() != '/')
        path.push_back('/');
    return b.origin() + path + query;
}

}  // namespace pharmaharvest
