#ifndef ACCSIM_CSFQ_TBM_HPP
#define ACCSIM_CSFQ_TBM_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "accsim/discipline.hpp"
#include "accsim/token_bucket.hpp"

namespace accsim {

// Exponential-averaging rate estimator:
//   rate <- (1 - e^(-T/K)) * l/T + e^(-T/K) * rate
// with T the interarrival time and l the packet size in bits.
// Simultaneous arrivals are treated as one nanosecond apart.
class RateEstimator {
  public:
    explicit RateEstimator(double k_seconds)
        : k_ns_(k_seconds * static_cast<double>(kNsPerSec)) {}

    double update(double bits, TimeNs t);

    // Estimate decayed to time t (no arrival): stale rates fade instead of
    // sticking at the last value when a stream goes quiet.
    double read(TimeNs t) const;

    double rate_bps() const { return rate_bps_; }
    TimeNs last_arrival() const { return last_arrival_; }

  private:
    double k_ns_;
    double rate_bps_ = 0;
    TimeNs last_arrival_ = -1;
};

// Probability of dropping a non-conformant packet whose flow is estimated
// at flow_rate given fair share alpha per unit weight w.
double csfq_drop_probability(double flow_rate_bps, double alpha_bps, double weight);

// Baseline of the CSFQ + token-bucket-meter scheme: meters tag packets,
// everything shares one FIFO, and non-conformant packets are dropped
// probabilistically against an estimated normalized fair rate alpha.
// A buffer-based amendment scales alpha down in proportion to the FIFO
// occupancy above a threshold.
class CsfqTbmScheduler : public Discipline {
  public:
    struct Config {
        std::vector<SubscriberContract> contracts;
        std::int64_t capacity_bps = 0;            // shared access link C
        double k_s = 0.1;                         // flow-rate averaging constant
        double k_alpha_s = 0.2;                   // alpha averaging constant
        std::int64_t fifo_bytes = 16'000'000;
        std::int64_t amendment_threshold_bytes = 64'000;
        std::uint64_t seed = 1;
    };

    CsfqTbmScheduler(const Config& cfg, TimeNs t0);

    EnqueueResult enqueue(Packet pkt, TimeNs t) override;
    std::optional<Packet> dequeue(TimeNs t) override;
    bool has_eligible(TimeNs) const override { return occupancy_ > 0; }
    std::int64_t queued_bytes() const override { return occupancy_; }
    std::int64_t queued_bytes(int subscriber) const override {
        return per_sub_queued_[subscriber];
    }

    double alpha() const { return alpha_; }
    double effective_alpha() const;
    double flow_rate(int i, TimeNs t) const { return flow_rate_[i].read(t); }
    std::int64_t occupancy() const { return occupancy_; }

  private:
    void update_alpha(double label, TimeNs t);

    struct Flow {
        TokenBucket meter;
        double weight;
        Flow(const SubscriberContract& c, TimeNs t0)
            : meter(c.token_rate_bps, c.bucket_bytes, t0), weight(c.weight()) {}
    };

    std::vector<Flow> flows_;
    std::vector<RateEstimator> flow_rate_;      // per-flow non-conformant rate, K
    RateEstimator conformant_rate_;             // aggregate, K_alpha
    RateEstimator nc_arrival_rate_;             // aggregate, K_alpha
    RateEstimator nc_accepted_rate_;            // aggregate, K_alpha

    double capacity_bps_;
    double k_alpha_ns_;
    std::int64_t fifo_capacity_;
    std::int64_t amendment_threshold_;

    // alpha state machine (per the CSFQ edge-router algorithm, single node)
    double alpha_ = 0;
    bool congested_ = false;
    TimeNs window_start_ = 0;
    double window_max_label_ = 0;
    double prev_window_max_label_ = 0;
    double total_weight_ = 0;

    std::deque<Packet> fifo_;
    std::int64_t occupancy_ = 0;
    std::vector<std::int64_t> per_sub_queued_;

    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace accsim

#endif  // ACCSIM_CSFQ_TBM_HPP
