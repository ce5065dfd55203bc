#pragma once

#include "pharmaharvest/timefmt.hpp"

#include <chrono>
#include <mutex>

namespace pharmaharvest {

using MonoTime = std::chrono::steady_clock::time_point;
using Nanos = std::chrono::nanoseconds;

/// Injected time source. Everything that waits or timestamps goes through
/// one of these so schedulers can be tested on virtual time.
class Clock {
public:
    virtual ~Clock() = default;
    virtual MonoTime now() const = 0;
    virtual Timestamp wall_now() const = 0;
    virtual void sleep_for(Nanos d) = 0;
};

class SystemClock final : public Clock {
public:
    MonoTime now() const override { return std::chrono::steady_clock::now(); }
    Timestamp wall_now() const override { return utc_now(); }
    void sleep_for(Nanos d) override;

    static SystemClock& instance();
};

/// Time only moves when someone sleeps or calls advance(). Thread-safe.
class VirtualClock final : public Clock {
public:
    explicit VirtualClock(Timestamp wall_origin = Timestamp{}) : wall_origin_(wall_origin) {}

    MonoTime now() const override;
    Timestamp wall_now() const override;
    void sleep_for(Nanos d) override { advance(d); }
    void advance(Nanos d);
    Nanos elapsed() const;

private:
    mutable std::mutex mu_;
    Nanos elapsed_{0};
    Timestamp wall_origin_;
};

}  // namespace pharmaharvest
