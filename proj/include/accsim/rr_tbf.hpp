#ifndef ACCSIM_RR_TBF_HPP
#define ACCSIM_RR_TBF_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "accsim/discipline.hpp"
#include "accsim/token_bucket.hpp"

namespace accsim {

// Baseline of current practice: per-subscriber token-bucket filter
// (shaper) in front of a round-robin scheduler. Packets wait in their
// subscriber queue until the head has accrued enough tokens; released
// heads are served cyclically. Excess bandwidth is never reallocated.
class RrTbfScheduler : public Discipline {
  public:
    struct Config {
        std::vector<SubscriberContract> contracts;
        std::int64_t max_packet_bytes = 1500;
    };

    RrTbfScheduler(const Config& cfg, TimeNs t0);

    EnqueueResult enqueue(Packet pkt, TimeNs t) override;
    std::optional<Packet> dequeue(TimeNs t) override;
    std::optional<TimeNs> next_wakeup(TimeNs t) const override;
    bool has_eligible(TimeNs t) const override;
    std::int64_t queued_bytes() const override { return total_queued_; }
    std::int64_t queued_bytes(int subscriber) const override {
        return subs_[subscriber].queued;
    }

    std::int64_t dropped_overflow(int i) const { return subs_[i].dropped_overflow; }
    int num_subscribers() const { return static_cast<int>(subs_.size()); }

  private:
    struct Sub {
        std::deque<Packet> q;
        TokenBucket shaper;
        std::int64_t capacity = 0;
        std::int64_t queued = 0;
        TimeNs head_release = 0;   // valid iff q non-empty
        std::int64_t dropped_overflow = 0;

        Sub(const SubscriberContract& c, TimeNs t0)
            : shaper(c.token_rate_bps, c.bucket_bytes, t0), capacity(c.queue_bytes) {}
    };

    void set_head_release(Sub& s, TimeNs t);

    std::vector<Sub> subs_;
    std::int64_t total_queued_ = 0;
    int cursor_ = 0;   // next queue to consider
};

}  // namespace accsim

#endif  // ACCSIM_RR_TBF_HPP
