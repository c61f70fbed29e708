#include "accsim/drr_tbm.hpp"

#include <cmath>
#include <stdexcept>

namespace accsim {

const char* drop_cause_name(DropCause c) {
    switch (c) {
        case DropCause::none: return "none";
        case DropCause::overflow_nonconformant: return "overflow_nonconformant";
        case DropCause::overflow_conformant_noswap: return "overflow_conformant_noswap";
        case DropCause::swap: return "swap";
        case DropCause::csfq_probabilistic: return "csfq_probabilistic";
        case DropCause::fifo_full: return "fifo_full";
    }
    return "unknown";
}

std::vector<std::int64_t> DrrTbmScheduler::quanta_for(
    const std::vector<SubscriberContract>& contracts, std::int64_t max_packet_bytes) {
    double min_w = 0;
    for (const auto& c : contracts) {
        const double w = c.weight();
        if (w <= 0) throw std::invalid_argument("drr_tbm: non-positive weight");
        if (min_w == 0 || w < min_w) min_w = w;
    }
    std::vector<std::int64_t> quanta;
    quanta.reserve(contracts.size());
    for (const auto& c : contracts) {
        const double q = c.weight() / min_w * static_cast<double>(max_packet_bytes);
        quanta.push_back(static_cast<std::int64_t>(std::ceil(q - 1e-9)));
    }
    return quanta;
}

DrrTbmScheduler::DrrTbmScheduler(const Config& cfg, TimeNs t0) {
    const auto quanta = quanta_for(cfg.contracts, cfg.max_packet_bytes);
    subs_.reserve(cfg.contracts.size());
    for (std::size_t i = 0; i < cfg.contracts.size(); ++i)
        subs_.emplace_back(cfg.contracts[i], quanta[i], t0);
}

std::int64_t DrrTbmScheduler::queued_bytes(int subscriber) const {
    return subs_[subscriber].queued();
}

EnqueueResult DrrTbmScheduler::enqueue(Packet pkt, TimeNs t) {
    Sub& s = subs_[pkt.subscriber];
    const std::int64_t size = pkt.size_bytes;
    const bool conformant = s.meter.meter(size, t);
    pkt.conformant = conformant;

    if (s.queued() + size > s.capacity) {
        if (conformant && s.nc >= size) {
            // Counter swap: discard the arriving packet but move its bytes
            // from the non-conformant to the conformant budget, emulating
            // preemption of queued non-conformant bytes without reordering.
            s.cc += size;
            s.nc -= size;
            s.drops.swap++;
            if (!s.in_conformant_list && !s.q.empty() &&
                s.cc >= s.q.front().size_bytes) {
                conformant_list_.push_back(pkt.subscriber);
                s.in_conformant_list = true;
            }
            return {EnqueueOutcome::swapped, DropCause::swap, true};
        }
        if (conformant) {
            s.drops.overflow_conformant_noswap++;
            return {EnqueueOutcome::dropped, DropCause::overflow_conformant_noswap, true};
        }
        s.drops.overflow_nonconformant++;
        return {EnqueueOutcome::dropped, DropCause::overflow_nonconformant, false};
    }

    s.q.push_back(pkt);
    total_queued_ += size;
    if (conformant) {
        s.cc += size;
        if (!s.in_conformant_list) {
            conformant_list_.push_back(pkt.subscriber);
            s.in_conformant_list = true;
        }
    } else {
        s.nc += size;
        if (!s.in_nonconformant_list) {
            nonconformant_list_.push_back(pkt.subscriber);
            s.in_nonconformant_list = true;
            s.dc = 0;   // activation resets the deficit; idle queues bank no credit
        }
    }
    return {EnqueueOutcome::accepted, DropCause::none, conformant};
}

std::optional<Packet> DrrTbmScheduler::dequeue(TimeNs) {
    if (auto pkt = serve_conformant()) return pkt;
    if (auto pkt = serve_nonconformant()) return pkt;
    return serve_fallback();
}

// Phase 1: round-robin over conformant budgets; deficit counters play no
// part. Subscribers whose budget no longer covers their head fall out of
// the list, so total scan work is amortized O(1) per enqueue.
std::optional<Packet> DrrTbmScheduler::serve_conformant() {
    while (!conformant_list_.empty()) {
        const int i = conformant_list_.front();
        conformant_list_.pop_front();
        Sub& s = subs_[i];
        s.in_conformant_list = false;
        if (s.q.empty()) continue;
        const std::int64_t head = s.q.front().size_bytes;
        if (s.cc < head) continue;
        s.cc -= head;
        Packet pkt = s.q.front();
        s.q.pop_front();
        total_queued_ -= head;
        if (!s.q.empty() && s.cc >= s.q.front().size_bytes) {
            conformant_list_.push_back(i);
            s.in_conformant_list = true;
        }
        return pkt;
    }
    return std::nullopt;
}

// Phase 2: DRR over non-conformant budgets. A fresh visit adds the quantum
// to whatever deficit the backlog carried over; when the previous
// transmission prepended this subscriber (Continued), the leftover deficit
// is used as is. The deficit is zeroed whenever the non-conformant backlog
// stops being servable, so idle queues bank no credit.
std::optional<Packet> DrrTbmScheduler::serve_nonconformant() {
    while (!nonconformant_list_.empty()) {
        const int i = nonconformant_list_.front();
        nonconformant_list_.pop_front();
        Sub& s = subs_[i];
        s.in_nonconformant_list = false;
        const bool kept_deficit = continued_;
        continued_ = false;
        if (s.q.empty()) {
            s.dc = 0;
            continue;
        }
        const std::int64_t head = s.q.front().size_bytes;
        if (!kept_deficit) s.dc += s.quantum;
        if (s.dc < head || s.nc < head) continue;
        s.dc -= head;
        s.nc -= head;
        Packet pkt = s.q.front();
        s.q.pop_front();
        total_queued_ -= head;
        if (!s.q.empty()) {
            const std::int64_t next = s.q.front().size_bytes;
            if (s.nc >= next) {
                if (s.dc >= next) {
                    continued_ = true;
                    nonconformant_list_.push_front(i);
                } else {
                    nonconformant_list_.push_back(i);
                }
                s.in_nonconformant_list = true;
            } else {
                s.dc = 0;
            }
            // Stranded-bytes repair: the new head may be covered by the
            // conformant budget even though the subscriber left the
            // conformant list earlier (mixed FIFO ordering).
            if (!s.in_conformant_list && s.cc >= next) {
                conformant_list_.push_back(i);
                s.in_conformant_list = true;
            }
        } else {
            s.dc = 0;
        }
        return pkt;
    }
    return std::nullopt;
}

// Phase 3: with variable packet sizes, swaps can fragment budgets so that
// neither CC nor NC alone covers a queue head. Serve such a head by
// charging NC first and CC for the remainder; CC + NC still equals the
// queued bytes and the link never idles over a non-empty queue.
std::optional<Packet> DrrTbmScheduler::serve_fallback() {
    const int n = static_cast<int>(subs_.size());
    for (int k = 0; k < n; ++k) {
        const int i = (fallback_cursor_ + k) % n;
        Sub& s = subs_[i];
        if (s.q.empty()) continue;
        const std::int64_t head = s.q.front().size_bytes;
        const std::int64_t from_nc = s.nc < head ? s.nc : head;
        s.nc -= from_nc;
        s.cc -= head - from_nc;
        Packet pkt = s.q.front();
        s.q.pop_front();
        total_queued_ -= head;
        fallback_cursor_ = (i + 1) % n;
        return pkt;
    }
    return std::nullopt;
}

}  // namespace accsim
