#ifndef ACCSIM_TOKEN_BUCKET_HPP
#define ACCSIM_TOKEN_BUCKET_HPP

#include <cstdint>
#include <optional>

#include "accsim/core.hpp"

namespace accsim {

// Token bucket usable as a meter (tag and never delay) or, via
// next_conformance_time(), as the timing core of a shaper.
//
// Tokens are kept in integer sub-byte units so that lazy accrual is exact:
// one byte equals 8e9 units, and rate_bps * elapsed_ns is directly a token
// delta in those units. No float drift over long runs.
class TokenBucket {
  public:
    // 1 byte = 8 bits = 8e9 bit-nanoseconds-per-second.
    static constexpr std::int64_t kUnitsPerByte = 8LL * kNsPerSec;

    TokenBucket(std::int64_t rate_bps, std::int64_t depth_bytes, TimeNs t0)
        : rate_bps_(rate_bps),
          depth_units_(depth_bytes * kUnitsPerByte),
          tokens_units_(depth_bytes * kUnitsPerByte),  // starts full
          last_update_(t0) {}

    // Replenish lazily, then take a conformance decision. Deducts tokens
    // only on a conformant verdict. Never blocks or drops.
    bool meter(std::int64_t size_bytes, TimeNs t) {
        replenish(t);
        const std::int64_t need = size_bytes * kUnitsPerByte;
        if (tokens_units_ >= need) {
            tokens_units_ -= need;
            return true;
        }
        return false;
    }

    // Earliest time at which meter(size_bytes, t') would return true,
    // without mutating state. nullopt when size exceeds the bucket depth
    // (the packet can never conform).
    std::optional<TimeNs> next_conformance_time(std::int64_t size_bytes, TimeNs t) const {
        const std::int64_t need = size_bytes * kUnitsPerByte;
        if (need > depth_units_) return std::nullopt;
        const std::int64_t have = tokens_at(t);
        if (have >= need) return t;
        const std::int64_t deficit = need - have;
        const TimeNs wait = static_cast<TimeNs>((deficit + rate_bps_ - 1) / rate_bps_);
        return t + wait;
    }

    double tokens_bytes(TimeNs t) const {
        return static_cast<double>(tokens_at(t)) / static_cast<double>(kUnitsPerByte);
    }

    std::int64_t rate_bps() const { return rate_bps_; }
    std::int64_t depth_bytes() const { return depth_units_ / kUnitsPerByte; }
    TimeNs last_update() const { return last_update_; }

  private:
    std::int64_t tokens_at(TimeNs t) const {
        const __int128 accrued =
            static_cast<__int128>(tokens_units_) +
            static_cast<__int128>(rate_bps_) * (t - last_update_);
        return accrued >= depth_units_ ? depth_units_ : static_cast<std::int64_t>(accrued);
    }

    void replenish(TimeNs t) {
        tokens_units_ = tokens_at(t);
        last_update_ = t;
    }

    std::int64_t rate_bps_;
    std::int64_t depth_units_;
    std::int64_t tokens_units_;
    TimeNs last_update_;
};

}  // namespace accsim

#endif  // ACCSIM_TOKEN_BUCKET_HPP
