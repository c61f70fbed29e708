#include "accsim/rr_tbf.hpp"

#include <stdexcept>

namespace accsim {

RrTbfScheduler::RrTbfScheduler(const Config& cfg, TimeNs t0) {
    subs_.reserve(cfg.contracts.size());
    for (const auto& c : cfg.contracts) {
        if (c.bucket_bytes < cfg.max_packet_bytes)
            throw std::invalid_argument("rr_tbf: bucket smaller than max packet, head would never release");
        subs_.emplace_back(c, t0);
    }
}

void RrTbfScheduler::set_head_release(Sub& s, TimeNs t) {
    if (s.q.empty()) return;
    // Only the head consumes tokens, so the release time computed now
    // stays valid until the head departs.
    s.head_release = *s.shaper.next_conformance_time(s.q.front().size_bytes, t);
}

EnqueueResult RrTbfScheduler::enqueue(Packet pkt, TimeNs t) {
    Sub& s = subs_[pkt.subscriber];
    const std::int64_t size = pkt.size_bytes;
    // Tag whether the packet would pass a meter on arrival; informational
    // only (the shaper, not the tag, gates departure).
    pkt.conformant = s.shaper.tokens_bytes(t) >= static_cast<double>(size);

    if (s.queued + size > s.capacity) {
        s.dropped_overflow++;
        return {EnqueueOutcome::dropped, DropCause::overflow_nonconformant, pkt.conformant};
    }
    s.q.push_back(pkt);
    s.queued += size;
    total_queued_ += size;
    if (s.q.size() == 1) set_head_release(s, t);
    return {EnqueueOutcome::accepted, DropCause::none, pkt.conformant};
}

std::optional<Packet> RrTbfScheduler::dequeue(TimeNs t) {
    const int n = static_cast<int>(subs_.size());
    for (int k = 0; k < n; ++k) {
        const int i = (cursor_ + k) % n;
        Sub& s = subs_[i];
        if (s.q.empty() || s.head_release > t) continue;
        Packet pkt = s.q.front();
        const bool ok = s.shaper.meter(pkt.size_bytes, t);
        (void)ok;   // release time reached implies tokens available
        s.q.pop_front();
        s.queued -= pkt.size_bytes;
        total_queued_ -= pkt.size_bytes;
        set_head_release(s, t);
        cursor_ = (i + 1) % n;
        return pkt;
    }
    return std::nullopt;
}

std::optional<TimeNs> RrTbfScheduler::next_wakeup(TimeNs t) const {
    std::optional<TimeNs> earliest;
    for (const auto& s : subs_) {
        if (s.q.empty()) continue;
        const TimeNs r = s.head_release > t ? s.head_release : t;
        if (!earliest || r < *earliest) earliest = r;
    }
    return earliest;
}

bool RrTbfScheduler::has_eligible(TimeNs t) const {
    for (const auto& s : subs_)
        if (!s.q.empty() && s.head_release <= t) return true;
    return false;
}

}  // namespace accsim
