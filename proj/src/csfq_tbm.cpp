#include "accsim/csfq_tbm.hpp"

#include <algorithm>
#include <cmath>

namespace accsim {

double RateEstimator::update(double bits, TimeNs t) {
    if (last_arrival_ < 0) {
        last_arrival_ = t;
        // No interval to average over yet; seed with nothing and let the
        // next arrival establish the first estimate.
        return rate_bps_;
    }
    TimeNs gap = t - last_arrival_;
    if (gap <= 0) gap = 1;   // simultaneous arrivals: treat as 1 ns apart
    const double t_ns = static_cast<double>(gap);
    const double decay = std::exp(-t_ns / k_ns_);
    const double inst = bits / (t_ns / static_cast<double>(kNsPerSec));
    rate_bps_ = (1.0 - decay) * inst + decay * rate_bps_;
    last_arrival_ = t;
    return rate_bps_;
}

double RateEstimator::read(TimeNs t) const {
    if (last_arrival_ < 0) return 0;
    const TimeNs gap = t - last_arrival_;
    if (gap <= 0) return rate_bps_;
    return rate_bps_ * std::exp(-static_cast<double>(gap) / k_ns_);
}

double csfq_drop_probability(double flow_rate_bps, double alpha_bps, double weight) {
    if (flow_rate_bps <= 0) return 0;
    const double p = 1.0 - alpha_bps * weight / flow_rate_bps;
    return p < 0 ? 0 : p;
}

CsfqTbmScheduler::CsfqTbmScheduler(const Config& cfg, TimeNs t0)
    : conformant_rate_(cfg.k_alpha_s),
      nc_arrival_rate_(cfg.k_alpha_s),
      nc_accepted_rate_(cfg.k_alpha_s),
      capacity_bps_(static_cast<double>(cfg.capacity_bps)),
      k_alpha_ns_(cfg.k_alpha_s * static_cast<double>(kNsPerSec)),
      fifo_capacity_(cfg.fifo_bytes),
      amendment_threshold_(cfg.amendment_threshold_bytes),
      window_start_(t0),
      rng_(cfg.seed) {
    flows_.reserve(cfg.contracts.size());
    flow_rate_.reserve(cfg.contracts.size());
    per_sub_queued_.assign(cfg.contracts.size(), 0);
    for (const auto& c : cfg.contracts) {
        flows_.emplace_back(c, t0);
        flow_rate_.emplace_back(cfg.k_s);
        total_weight_ += c.weight();
    }
}

double CsfqTbmScheduler::effective_alpha() const {
    if (occupancy_ <= amendment_threshold_ || occupancy_ == 0) return alpha_;
    return alpha_ * static_cast<double>(amendment_threshold_) / static_cast<double>(occupancy_);
}

// Single-node CSFQ alpha estimation: multiplicative correction while
// congested (at most once per K_alpha), window-max of normalized flow
// rates while uncongested.
void CsfqTbmScheduler::update_alpha(double label, TimeNs t) {
    window_max_label_ = std::max(window_max_label_, label);
    const double cex = std::max(0.0, capacity_bps_ - conformant_rate_.read(t));
    const double arrival = nc_arrival_rate_.read(t);
    const bool congested_now = arrival >= cex;

    if (congested_now) {
        if (!congested_) {
            congested_ = true;
            window_start_ = t;
            if (alpha_ <= 0) {
                const double seed = std::max(window_max_label_, prev_window_max_label_);
                alpha_ = seed > 0 ? seed : cex / total_weight_;
            }
        } else if (static_cast<double>(t - window_start_) >= k_alpha_ns_) {
            const double accepted = nc_accepted_rate_.read(t);
            if (accepted > 0) alpha_ *= cex / accepted;
            const double cap = std::max(window_max_label_, prev_window_max_label_);
            if (cap > 0 && alpha_ > cap) alpha_ = cap;
            window_start_ = t;
            prev_window_max_label_ = window_max_label_;
            window_max_label_ = 0;
        }
    } else {
        if (congested_) {
            congested_ = false;
            window_start_ = t;
            prev_window_max_label_ = window_max_label_;
            window_max_label_ = label;
        } else if (static_cast<double>(t - window_start_) >= k_alpha_ns_) {
            alpha_ = window_max_label_;
            window_start_ = t;
            prev_window_max_label_ = window_max_label_;
            window_max_label_ = 0;
        }
    }
}

EnqueueResult CsfqTbmScheduler::enqueue(Packet pkt, TimeNs t) {
    Flow& f = flows_[pkt.subscriber];
    const std::int64_t size = pkt.size_bytes;
    const double bits = static_cast<double>(size) * 8.0;
    const bool conformant = f.meter.meter(size, t);
    pkt.conformant = conformant;

    if (conformant) {
        conformant_rate_.update(bits, t);
        // Conformant packets bypass the drop decision; only a full FIFO
        // loses them (the scheme's known weakness).
        if (occupancy_ + size > fifo_capacity_)
            return {EnqueueOutcome::dropped, DropCause::fifo_full, true};
        fifo_.push_back(pkt);
        occupancy_ += size;
        per_sub_queued_[pkt.subscriber] += size;
        return {EnqueueOutcome::accepted, DropCause::none, true};
    }

    const double rate = flow_rate_[pkt.subscriber].update(bits, t);
    nc_arrival_rate_.update(bits, t);
    update_alpha(rate / f.weight, t);

    const double p = csfq_drop_probability(rate, effective_alpha(), f.weight);
    if (p > 0 && uniform_(rng_) < p)
        return {EnqueueOutcome::dropped, DropCause::csfq_probabilistic, false};
    if (occupancy_ + size > fifo_capacity_)
        return {EnqueueOutcome::dropped, DropCause::fifo_full, false};
    fifo_.push_back(pkt);
    occupancy_ += size;
    per_sub_queued_[pkt.subscriber] += size;
    nc_accepted_rate_.update(bits, t);
    return {EnqueueOutcome::accepted, DropCause::none, false};
}

std::optional<Packet> CsfqTbmScheduler::dequeue(TimeNs) {
    if (fifo_.empty()) return std::nullopt;
    Packet pkt = fifo_.front();
    fifo_.pop_front();
    occupancy_ -= pkt.size_bytes;
    per_sub_queued_[pkt.subscriber] -= pkt.size_bytes;
    return pkt;
}

}  // namespace accsim
