#include "pharmaharvest/clock.hpp"

#include <thread>

namespace pharmaharvest {

void SystemClock::sleep_for(Nanos d) {
    if (d > Nanos::zero()) std::this_thread::sleep_for(d);
}

SystemClock& SystemClock::instance() {
    static SystemClock clock;
    return clock;
}

MonoTime VirtualClock::now() const {
    std::lock_guard lock(mu_);
    return MonoTime{} + elapsed_;
}

Timestamp VirtualClock::wall_now() const {
    std::lock_guard lock(mu_);
    return wall_origin_ + std::chrono::duration_cast<std::chrono::milliseconds>(elapsed_);
}

void VirtualClock::advance(Nanos d) {
    if (d <= Nanos::zero()) return;
    std::lock_guard lock(mu_);
    elapsed_ += d;
}

Nanos VirtualClock::elapsed() const {
    std::lock_guard lock(mu_);
    return elapsed_;
}

}  // namespace pharmaharvest
