#ifndef ACCSIM_DRR_TBM_HPP
#define ACCSIM_DRR_TBM_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "accsim/discipline.hpp"
#include "accsim/token_bucket.hpp"

namespace accsim {

// DRR + token-bucket-meter scheduler: one physical FIFO per subscriber with
// logically separated conformant/non-conformant byte budgets (CC, NC).
// Dequeueing serves conformant budgets round-robin first, then runs DRR
// over non-conformant budgets with deficit carryover via the Continued flag.
//
// Budgets, not per-packet tags, drive service: on overflow of a conformant
// arrival, the arriving packet is discarded but its bytes are swapped from
// NC to CC, emulating preemption of queued non-conformant bytes without
// reordering the FIFO.
class DrrTbmScheduler : public Discipline {
  public:
    struct Config {
        std::vector<SubscriberContract> contracts;
        std::int64_t max_packet_bytes = 1500;
    };

    struct DropCounters {
        std::int64_t overflow_nonconformant = 0;
        std::int64_t overflow_conformant_noswap = 0;
        std::int64_t swap = 0;
    };

    DrrTbmScheduler(const Config& cfg, TimeNs t0);

    // Q_i = ceil(w_i / min_j w_j * max_packet_bytes); every quantum is at
    // least one max-size packet so a backlogged queue always progresses.
    // Throws std::invalid_argument on non-positive weights.
    static std::vector<std::int64_t> quanta_for(const std::vector<SubscriberContract>& contracts,
                                                std::int64_t max_packet_bytes);

    EnqueueResult enqueue(Packet pkt, TimeNs t) override;
    std::optional<Packet> dequeue(TimeNs t) override;
    bool has_eligible(TimeNs) const override { return total_queued_ > 0; }
    std::int64_t queued_bytes() const override { return total_queued_; }
    std::int64_t queued_bytes(int subscriber) const override;

    // Introspection for tests and metrics.
    std::int64_t cc(int i) const { return subs_[i].cc; }
    std::int64_t nc(int i) const { return subs_[i].nc; }
    std::int64_t deficit(int i) const { return subs_[i].dc; }
    std::int64_t quantum(int i) const { return subs_[i].quantum; }
    const DropCounters& drops(int i) const { return subs_[i].drops; }
    int num_subscribers() const { return static_cast<int>(subs_.size()); }

  private:
    struct Sub {
        std::deque<Packet> q;
        std::int64_t cc = 0;       // conformant byte budget
        std::int64_t nc = 0;       // non-conformant byte budget
        std::int64_t dc = 0;       // deficit counter
        std::int64_t quantum = 0;
        std::int64_t capacity = 0;
        bool in_conformant_list = false;
        bool in_nonconformant_list = false;
        TokenBucket meter;
        DropCounters drops;

        Sub(const SubscriberContract& c, std::int64_t quantum_bytes, TimeNs t0)
            : quantum(quantum_bytes), capacity(c.queue_bytes),
              meter(c.token_rate_bps, c.bucket_bytes, t0) {}

        std::int64_t queued() const { return cc + nc; }
    };

    std::optional<Packet> serve_conformant();
    std::optional<Packet> serve_nonconformant();
    std::optional<Packet> serve_fallback();

    std::vector<Sub> subs_;
    std::deque<int> conformant_list_;
    std::deque<int> nonconformant_list_;
    bool continued_ = false;    // head of nonconformant_list_ keeps its deficit
    std::int64_t total_queued_ = 0;
    int fallback_cursor_ = 0;
};

}  // namespace accsim

#endif  // ACCSIM_DRR_TBM_HPP
