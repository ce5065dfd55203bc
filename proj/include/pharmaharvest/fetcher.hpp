#pragma once

#include "pharmaharvest/clock.hpp"
#include "pharmaharvest/politeness.hpp"
#include "pharmaharvest/robots.hpp"
#include "pharmaharvest/transport.hpp"
#include "pharmaharvest/url.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace pharmaharvest::fetch {

struct FetchResult {
    std::string url;
    int status = 0;
    std::string body;
    std::string content_type;
    Timestamp started_at{};
    Timestamp finished_at{};
    int attempt = 1;
};

/// The polite network layer. Each host gets:
///  - a robots.txt lookup, fetched at most once per Fetcher and cached;
///  - dispatches spaced by at least policy.min_interhost_delay;
///  - strictly serialised requests, whatever the caller's threading.
/// Transient failures (timeouts, transport errors, 429 and 5xx) are retried
/// up to policy.max_retries times, each attempt taking a fresh slot.
class Fetcher {
public:
    Fetcher(Transport& transport, Clock& clock, PolitenessPolicy policy);

    /// Throws RobotsDisallowed (before any request to the path),
    /// ExhaustedRetries (carrying the last status, 0 when no response was
    /// received) or Timeout when every attempt timed out.
    FetchResult fetch(std::string_view url);

    RobotsVerdict robots_verdict(std::string_view url);

    const PolitenessPolicy& policy() const noexcept { return policy_; }
    Clock& clock() noexcept { return clock_; }
    HostLedger& ledger() noexcept { return ledger_; }

    /// Requests handed to the transport, robots fetches included.
    std::size_t dispatch_count() const noexcept { return dispatches_.load(); }

private:
    enum class RobotsState { Absent, Present, Unreachable };
    struct RobotsEntry {
        RobotsState state = RobotsState::Absent;
        std::string document;
    };

    const RobotsEntry& robots_for(const Url& url);  // caller holds host lock
    RobotsVerdict verdict_for(const Url& url, const RobotsEntry& entry) const;
    FetchResult fetch_with_retries(const Url& url);  // caller holds host lock

    Transport& transport_;
    Clock& clock_;
    PolitenessPolicy policy_;
    HostLedger ledger_;
    std::mutex robots_mu_;
    std::map<std::string, RobotsEntry> robots_;
    std::atomic<std::size_t> dispatches_{0};
};

}  // namespace pharmaharvest::fetch
