#include "pharmaharvest/politeness.hpp"

#include "pharmaharvest/errors.hpp"

#include <cstdlib>

namespace pharmaharvest::fetch {

std::string default_user_agent() {
    if (const char* env = std::getenv("PHARMAHARVEST_USER_AGENT"); env && *env) return env;
    return "pharmaharvest/0.1 (+https://github.com/pharmaharvest/pharmaharvest)";
}

void PolitenessPolicy::validate() const {
    if (min_interhost_delay <= Millis::zero()) throw InvalidArgument("min_interhost_delay must be positive");
    if (max_retries < 0) throw InvalidArgument("max_retries must be nonnegative");
    if (per_step_settle_delay < Millis::zero()) throw InvalidArgument("per_step_settle_delay must be nonnegative");
    if (request_timeout <= Millis::zero()) throw InvalidArgument("request_timeout must be positive");
}

Millis PolitenessPolicy::settle_delay_for(SourceId source) const {
    if (const auto it = settle_overrides.find(source); it != settle_overrides.end()) return it->second;
    return per_step_settle_delay;
}

Nanos HostLedger::acquire_slot(std::string_view host, MonoTime now, Nanos min_delay) {
    std::lock_guard lock(mu_);
    const std::string key(host);
    Nanos wait{0};
    if (const auto it = last_.find(key); it != last_.end()) {
        const auto earliest = it->second + min_delay;
        if (earliest > now) wait = earliest - now;
    }
    last_[key] = now + wait;
    return wait;
}

std::optional<MonoTime> HostLedger::last_dispatch(std::string_view host) const {
    std::lock_guard lock(mu_);
    if (const auto it = last_.find(std::string(host)); it != last_.end()) return it->second;
    return std::nullopt;
}

std::unique_lock<std::mutex> HostLedger::lock_host(std::string_view host) {
    std::mutex* m = nullptr;
    {
        std::lock_guard lock(mu_);
        auto& slot = host_locks_[std::string(host)];
        if (!slot) slot = std::make_unique<std::mutex>();
        m = slot.get();
    }
    return std::unique_lock<std::mutex>(*m);
}

}  // namespace pharmaharvest::fetch
