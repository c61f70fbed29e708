#ifndef ACCSIM_TRAFFIC_HPP
#define ACCSIM_TRAFFIC_HPP

#include <cstdint>
#include <optional>
#include <variant>

#include "accsim/core.hpp"

namespace accsim {

// Deterministic constant-bit-rate source: one packet every period.
struct CbrSpec {
    std::int64_t packet_bytes = 1000;
    TimeNs period = 500'000;           // 0.5 ms
    TimeNs start = 0;
    std::optional<TimeNs> stop;        // none = until horizon

    double rate_bps() const {
        return static_cast<double>(packet_bytes) * 8.0 * kNsPerSec / static_cast<double>(period);
    }

    // k-th emission time, or nullopt when past stop.
    std::optional<TimeNs> emission(std::int64_t k) const {
        const TimeNs t = start + k * period;
        if (stop && t >= *stop) return std::nullopt;
        return t;
    }
};

// One-shot burst of ceil(burst_bytes / packet_bytes) packets injected
// back-to-back at the injection rate (defaults to the backbone rate, so
// the burst is effectively instantaneous next to the access link).
struct BurstSpec {
    std::int64_t burst_bytes = 10'000'000;
    std::int64_t packet_bytes = 1000;
    TimeNs start = 0;
    std::int64_t injection_rate_bps = 10'000'000'000;

    std::int64_t packet_count() const {
        return (burst_bytes + packet_bytes - 1) / packet_bytes;
    }

    std::optional<TimeNs> emission(std::int64_t k) const {
        if (k >= packet_count()) return std::nullopt;
        return start + k * transmission_time_ns(packet_bytes, injection_rate_bps);
    }
};

struct TcpSpec {
    std::int64_t mss_bytes = 1500;
    TimeNs start = 0;
};

using SourceSpec = std::variant<CbrSpec, BurstSpec, TcpSpec>;

// Simplified greedy Reno-style AIMD sender. Window bookkeeping only; the
// engine owns emission timing, ack delivery and loss notification.
class GreedyTcpSource {
  public:
    explicit GreedyTcpSource(const TcpSpec& spec)
        : mss_(spec.mss_bytes) {}

    bool can_send() const {
        return in_flight_bytes_ + mss_ <= static_cast<std::int64_t>(cwnd_ * static_cast<double>(mss_));
    }

    // Returns the sequence number of the sent segment.
    std::int64_t on_send() {
        in_flight_bytes_ += mss_;
        return next_seq_++;
    }

    void on_ack(std::int64_t size_bytes) {
        in_flight_bytes_ -= size_bytes;
        if (cwnd_ < ssthresh_) {
            cwnd_ += 1.0;              // slow start: doubles per RTT
        } else {
            cwnd_ += 1.0 / cwnd_;      // congestion avoidance: +1 per RTT
        }
    }

    void on_loss(std::int64_t seq, std::int64_t size_bytes) {
        in_flight_bytes_ -= size_bytes;
        if (seq < recovery_until_) return;   // one decrease per window of data
        ssthresh_ = cwnd_ / 2.0 < 2.0 ? 2.0 : cwnd_ / 2.0;
        cwnd_ = ssthresh_;
        recovery_until_ = next_seq_;
    }

    void on_timeout() {
        ssthresh_ = cwnd_ / 2.0 < 2.0 ? 2.0 : cwnd_ / 2.0;
        cwnd_ = 1.0;
        recovery_until_ = next_seq_;
    }

    bool in_slow_start() const { return cwnd_ < ssthresh_; }
    double cwnd_segments() const { return cwnd_; }
    double ssthresh_segments() const { return ssthresh_; }
    std::int64_t in_flight_bytes() const { return in_flight_bytes_; }
    std::int64_t mss_bytes() const { return mss_; }

  private:
    std::int64_t mss_;
    double cwnd_ = 2.0;
    double ssthresh_ = 1e9;
    std::int64_t in_flight_bytes_ = 0;
    std::int64_t next_seq_ = 0;
    std::int64_t recovery_until_ = -1;
};

}  // namespace accsim

#endif  // ACCSIM_TRAFFIC_HPP
