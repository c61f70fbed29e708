#ifndef ACCSIM_DISCIPLINE_HPP
#define ACCSIM_DISCIPLINE_HPP

#include <cstdint>
#include <optional>

#include "accsim/core.hpp"

namespace accsim {

enum class EnqueueOutcome : std::uint8_t { accepted, dropped, swapped };

enum class DropCause : std::uint8_t {
    none = 0,
    overflow_nonconformant,       // full queue, non-conformant arrival
    overflow_conformant_noswap,   // full queue, conformant arrival, nothing to preempt
    swap,                         // arriving conformant packet discarded, budgets swapped
    csfq_probabilistic,           // CSFQ drop decision
    fifo_full,                    // shared FIFO tail drop
};

const char* drop_cause_name(DropCause c);

struct EnqueueResult {
    EnqueueOutcome outcome = EnqueueOutcome::accepted;
    DropCause cause = DropCause::none;
    bool conformant = false;
};

// Queueing discipline behind the shared access link. The engine serializes
// all calls; dequeue is invoked only when the link is free.
class Discipline {
  public:
    virtual ~Discipline() = default;

    virtual EnqueueResult enqueue(Packet pkt, TimeNs t) = 0;
    virtual std::optional<Packet> dequeue(TimeNs t) = 0;

    // Earliest future time at which a currently queued packet may become
    // servable (shaper releases). nullopt when nothing is pending.
    virtual std::optional<TimeNs> next_wakeup(TimeNs t) const { (void)t; return std::nullopt; }

    // True when a queued packet is servable right now; used by the engine
    // to detect work-conservation violations.
    virtual bool has_eligible(TimeNs t) const = 0;

    virtual std::int64_t queued_bytes() const = 0;
    virtual std::int64_t queued_bytes(int subscriber) const = 0;
};

}  // namespace accsim

#endif  // ACCSIM_DISCIPLINE_HPP
