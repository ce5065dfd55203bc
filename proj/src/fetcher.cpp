#include "pharmaharvest/fetcher.hpp"

#include "pharmaharvest/errors.hpp"

namespace pharmaharvest::fetch {
namespace {

bool transient_status(int status) { return status == 429 || status >= 500; }
bool success_status(int status) { return status >= 200 && status < 300; }

}  // namespace

Fetcher::Fetcher(Transport& transport, Clock& clock, PolitenessPolicy policy)
    : transport_(transport), clock_(clock), policy_(std::move(policy)) {
    policy_.validate();
}

FetchResult Fetcher::fetch(std::string_view text) {
    const Url url = parse_url(text);
    auto host_lock = ledger_.lock_host(url.authority());
    const auto& robots = robots_for(url);
    const auto verdict = verdict_for(url, robots);
    if (!verdict.allowed)
        throw RobotsDisallowed(url.str() + " is disallowed by robots.txt (" +
                               verdict.matched_rule.value_or("no rule") + ")");
    return fetch_with_retries(url);
}

RobotsVerdict Fetcher::robots_verdict(std::string_view text) {
    const Url url = parse_url(text);
    auto host_lock = ledger_.lock_host(url.authority());
    return verdict_for(url, robots_for(url));
}

RobotsVerdict Fetcher::verdict_for(const Url& url, const RobotsEntry& entry) const {
    switch (entry.state) {
        case RobotsState::Absent: return check_robots(std::nullopt, policy_.user_agent, url.target);
        case RobotsState::Present: return check_robots(entry.document, policy_.user_agent, url.target);
        case RobotsState::Unreachable: break;
    }
    // An unreachable robots.txt is treated as a complete disallow.
    return RobotsVerdict{false, std::string("robots.txt unreachable"), true};
}

const Fetcher::RobotsEntry& Fetcher::robots_for(const Url& url) {
    const auto origin = url.origin();
    {
        std::lock_guard lock(robots_mu_);
        if (const auto it = robots_.find(origin); it != robots_.end()) return it->second;
    }

    RobotsEntry entry;
    Url robots_url = url;
    robots_url.target = "/robots.txt";
    try {
        auto result = fetch_with_retries(robots_url);
        entry.state = RobotsState::Present;
        entry.document = std::move(result.body);
    } catch (const ExhaustedRetries& e) {
        const int s = e.last_status();
        entry.state = (s >= 400 && s < 500 && s != 429) ? RobotsState::Absent : RobotsState::Unreachable;
    } catch (const Timeout&) {
        entry.state = RobotsState::Unreachable;
    }

    std::lock_guard lock(robots_mu_);
    return robots_.emplace(origin, std::move(entry)).first->second;
}

FetchResult Fetcher::fetch_with_retries(const Url& url) {
    const auto host = url.authority();
    const auto url_text = url.str();
    int last_status = 0;
    bool last_was_timeout = false;
    std::string last_message;
    const int max_attempts = policy_.max_retries + 1;

    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        clock_.sleep_for(ledger_.acquire_slot(host, clock_.now(), policy_.min_interhost_delay));
        const auto started = clock_.wall_now();
        ++dispatches_;
        TransportResponse response;
        try {
            response = transport_.get({url_text, policy_.user_agent, policy_.request_timeout});
        } catch (const Timeout& e) {
            last_status = 0;
            last_was_timeout = true;
            last_message = e.what();
            continue;
        } catch (const TransportError& e) {
            last_status = 0;
            last_was_timeout = false;
            last_message = e.what();
            continue;
        }
        const auto finished = std::max(started, clock_.wall_now());

        if (success_status(response.status)) {
            return FetchResult{url_text,
                               response.status,
                               std::move(response.body),
                               std::move(response.content_type),
                               started,
                               finished,
                               attempt};
        }
        last_status = response.status;
        last_was_timeout = false;
        last_message = "HTTP " + std::to_string(response.status);
        if (!transient_status(response.status))
            throw ExhaustedRetries(url_text + ": " + last_message, response.status, attempt);
    }

    if (last_was_timeout)
        throw Timeout(url_text + ": timed out on all " + std::to_string(max_attempts) + " attempts");
    throw ExhaustedRetries(url_text + ": gave up after " + std::to_string(max_attempts) + " attempts (" +
                               last_message + ")",
                           last_status, max_attempts);
}

}  // namespace pharmaharvest::fetch
