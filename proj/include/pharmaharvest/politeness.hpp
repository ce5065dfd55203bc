#pragma once

#include "pharmaharvest/clock.hpp"
#include "pharmaharvest/types.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

namespace pharmaharvest::fetch {

using Millis = std::chrono::milliseconds;

/// Identifies the tool and a contact URL. PHARMAHARVEST_USER_AGENT
/// replaces it when set and nonempty.
std::string default_user_agent();

struct PolitenessPolicy {
    Millis min_interhost_delay{2000};  ///< spacing between requests to one host
    Millis per_step_settle_delay{1000};
    int max_retries = 3;
    Millis request_timeout{30000};
    std::string user_agent = default_user_agent();
    std::map<SourceId, Millis> settle_overrides;

    /// Throws InvalidArgument unless min_interhost_delay > 0 and
    /// max_retries >= 0.
    void validate() const;
    Millis settle_delay_for(SourceId source) const;
};

/// Per-host record of the last scheduled dispatch time, plus the per-host
/// mutex that serialises in-flight requests. Thread-safe.
class HostLedger {
public:
    /// Returns how long to sleep before dispatching to `host` so that
    /// consecutive dispatches are at least `min_delay` apart, and records
    /// now + wait as the host's scheduled dispatch.
    Nanos acquire_slot(std::string_view host, MonoTime now, Nanos min_delay);

    std::optional<MonoTime> last_dispatch(std::string_view host) const;

    /// Held for the whole lifetime of a request to `host`.
    std::unique_lock<std::mutex> lock_host(std::string_view host);

private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, MonoTime> last_;
    std::unordered_map<std::string, std::unique_ptr<std::mutex>> host_locks_;
};

inline Nanos acquire_slot(std::string_view host, MonoTime now, const PolitenessPolicy& policy, HostLedger& ledger) {
    return ledger.acquire_slot(host, now, policy.min_interhost_delay);
}

}  // namespace pharmaharvest::fetch
