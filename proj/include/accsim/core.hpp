#ifndef ACCSIM_CORE_HPP
#define ACCSIM_CORE_HPP

#include <cassert>
#include <cstdint>
#include <string>

namespace accsim {

// Simulated time is an integer count of nanoseconds. 240-s runs at Gb/s
// rates need exact event ordering, which float seconds cannot give.
using TimeNs = std::int64_t;

constexpr TimeNs kNsPerSec = 1'000'000'000;

inline TimeNs seconds_to_ns(double s) {
    return static_cast<TimeNs>(s * static_cast<double>(kNsPerSec) + 0.5);
}

inline double ns_to_seconds(TimeNs t) {
    return static_cast<double>(t) / static_cast<double>(kNsPerSec);
}

// Exact serialization delay: ceil(size_bytes * 8e9 / rate_bps) ns.
inline TimeNs transmission_time_ns(std::int64_t size_bytes, std::int64_t rate_bps) {
    assert(rate_bps > 0);
    const __int128 bits_ns = static_cast<__int128>(size_bytes) * 8 * kNsPerSec;
    return static_cast<TimeNs>((bits_ns + rate_bps - 1) / rate_bps);
}

inline double transmission_time_s(std::int64_t size_bytes, double rate_bps) {
    return static_cast<double>(size_bytes) * 8.0 / rate_bps;
}

struct Packet {
    std::int32_t subscriber = 0;       // index in [0, N)
    std::int32_t size_bytes = 0;
    TimeNs arrival = 0;
    std::int64_t sequence_no = 0;      // per-subscriber, dense, increasing
    bool conformant = false;           // set by the meter on arrival
};

struct LinkConfig {
    std::int64_t capacity_bps = 0;
    TimeNs propagation_delay = 0;
};

// Reference rate for weight normalization: w_i = token_rate_bps / 1 Mb/s.
// Any common scale works; this keeps weights human-readable.
constexpr double kWeightReferenceBps = 1e6;

struct SubscriberContract {
    std::int64_t token_rate_bps = 0;
    std::int64_t bucket_bytes = 0;
    std::int64_t queue_bytes = 0;

    double weight() const {
        return static_cast<double>(token_rate_bps) / kWeightReferenceBps;
    }
};

// Monotone simulation clock. Owned by the engine; read-only elsewhere.
class SimClock {
  public:
    TimeNs now() const { return now_; }

    void advance_to(TimeNs t) {
        assert(t >= now_);
        now_ = t;
    }

  private:
    TimeNs now_ = 0;
};

}  // namespace accsim

#endif  // ACCSIM_CORE_HPP
