#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

namespace ssi {

using Tick = std::uint64_t;

// Deterministic logical time shared by the simulation: ledgers finalize,
// challenges expire and wallets lock out in ticks, never wall time.
class LogicalClock {
public:
    Tick now() const noexcept { return tick_.load(std::memory_order_acquire); }

    Tick advance(Tick steps = 1) noexcept {
        return tick_.fetch_add(steps, std::memory_order_acq_rel) + steps;
    }

    // No-op when the target is already in the past.
    void advance_until(Tick target) noexcept {
        Tick current = tick_.load(std::memory_order_acquire);
        while (current < target &&
               !tick_.compare_exchange_weak(current, target, std::memory_order_acq_rel)) {
        }
    }

private:
    std::atomic<Tick> tick_{0};
};

using ClockPtr = std::shared_ptr<LogicalClock>;

}  // namespace ssi
