#include "pharmaharvest/robots.hpp"

#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/text.hpp"

#include <cctype>
#include <vector>

namespace pharmaharvest::fetch {
namespace {

struct Rule {
    bool allow;
    std::string pattern;
};

struct Group {
    std::vector<std::string> agents;  // lowercased tokens
    std::vector<Rule> rules;
};

// '*' matches any run, '$' at the end anchors. Patterns match path prefixes.
bool pattern_matches(std::string_view pattern, std::string_view path) {
    bool anchored = false;
    if (!pattern.empty() && pattern.back() == '$') {
        anchored = true;
        pattern.remove_suffix(1);
    }
    // Iterative wildcard matching with single-star backtracking.
    std::size_t p = 0, s = 0;
    std::size_t star = std::string_view::npos, star_s = 0;
    while (s < path.size()) {
        if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            star_s = s;
        } else if (p < pattern.size() && pattern[p] == path[s]) {
            ++p;
            ++s;
        } else if (p == pattern.size() && !anchored) {
            return true;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            s = ++star_s;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

std::vector<Group> parse_groups(std::string_view doc) {
    std::vector<Group> groups;
    bool last_was_agent = false;
    for (const auto& raw_line : text::split(doc, '\n')) {
        std::string_view line = raw_line;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = text::trim(line);
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        const auto key = text::lower(text::trim(line.substr(0, colon)));
        const auto value = std::string(text::trim(line.substr(colon + 1)));

        if (key == "user-agent") {
            if (!last_was_agent || groups.empty()) groups.emplace_back();
            groups.back().agents.push_back(text::lower(product_token(value.empty() ? "*" : value)));
            last_was_agent = true;
            continue;
        }
        last_was_agent = false;
        if (key != "allow" && key != "disallow") continue;
        if (groups.empty()) continue;  // rules before any user-agent line
        if (value.empty()) continue;   // empty rule means no restriction
        groups.back().rules.push_back({key == "allow", value});
    }
    return groups;
}

}  // namespace

std::string product_token(std::string_view user_agent) {
    user_agent = text::trim(user_agent);
    if (user_agent.starts_with("*")) return "*";
    std::string out;
    for (char c : user_agent) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '-' || c == '_') out.push_back(c);
        else break;
    }
    return out;
}

RobotsVerdict check_robots(const std::optional<std::string>& robots_document, std::string_view user_agent,
                           std::string_view path) {
    if (path.empty() || path.front() != '/') throw InvalidArgument("robots path must begin with '/'");
    if (!robots_document) return RobotsVerdict{true, std::nullopt, false};

    RobotsVerdict verdict{true, std::nullopt, true};
    if (path == "/robots.txt") return verdict;

    const auto groups = parse_groups(*robots_document);
    const auto token = text::lower(product_token(user_agent));

    std::vector<const Rule*> rules;
    auto collect = [&](std::string_view wanted) {
        for (const auto& g : groups)
            for (const auto& a : g.agents)
                if (a == wanted) {
                    for (const auto& r : g.rules) rules.push_back(&r);
                    break;
                }
    };
    if (!token.empty() && token != "*") collect(token);
    if (rules.empty()) {
        bool specific_group_exists = false;
        for (const auto& g : groups)
            for (const auto& a : g.agents) specific_group_exists |= (!token.empty() && a == token);
        if (!specific_group_exists) collect("*");
    }

    const Rule* best = nullptr;
    for (const auto* r : rules) {
        if (!pattern_matches(r->pattern, path)) continue;
        if (!best || r->pattern.size() > best->pattern.size() ||
            (r->pattern.size() == best->pattern.size() && r->allow && !best->allow))
            best = r;
    }
    if (best) {
        verdict.allowed = best->allow;
        verdict.matched_rule = std::string(best->allow ? "Allow: " : "Disallow: ") + best->pattern;
    }
    return verdict;
}

}  // namespace pharmaharvest::fetch
