#include "accsim/engine.hpp"

#include <memory>
#include <queue>
#include <unordered_map>

#include "accsim/csfq_tbm.hpp"
#include "accsim/drr_tbm.hpp"
#include "accsim/rr_tbf.hpp"
#include "accsim/traffic.hpp"

namespace accsim {

namespace {

enum class EvKind : std::uint8_t { source_emit, link_done, timer, tcp_ack, tcp_loss };

struct Ev {
    TimeNs t;
    std::uint8_t prio;     // link_done first at equal times
    std::uint64_t order;   // insertion order, final tiebreaker
    EvKind kind;
    std::int32_t a = 0;    // source or subscriber index
    std::int64_t b = 0;    // emission counter / packet size
    std::int64_t c = 0;    // tcp sequence number
};

struct EvLater {
    bool operator()(const Ev& x, const Ev& y) const {
        if (x.t != y.t) return x.t > y.t;
        if (x.prio != y.prio) return x.prio > y.prio;
        return x.order > y.order;
    }
};

constexpr std::uint8_t kPrioLinkDone = 0;
constexpr std::uint8_t kPrioArrival = 1;
constexpr std::uint8_t kPrioTimer = 2;

struct SourceState {
    int subscriber;
    const SourceSpec* spec;
    std::unique_ptr<GreedyTcpSource> tcp;
};

class Simulation {
  public:
    Simulation(const Scenario& sc, std::uint64_t seed, const RunOptions& opts)
        : sc_(sc), opts_(opts) {
        const int n = static_cast<int>(sc.contracts.size());
        log_.num_flows = n;
        log_.horizon = sc.horizon;
        log_.totals.resize(n);
        if (opts.bin_width > 0) {
            log_.bin_width = opts.bin_width;
            log_.bin_bytes.assign(n, std::vector<std::int64_t>(
                static_cast<std::size_t>(sc.horizon / opts.bin_width) + 1, 0));
        }
        seq_counters_.assign(n, 0);
        tcp_source_of_sub_.assign(n, -1);
        if (opts.record_packets) pending_record_.resize(n);

        switch (sc.discipline.kind) {
            case DisciplineKind::drr_tbm: {
                DrrTbmScheduler::Config cfg{sc.contracts, sc.topology.max_packet_bytes};
                disc_ = std::make_unique<DrrTbmScheduler>(cfg, 0);
                break;
            }
            case DisciplineKind::rr_tbf: {
                RrTbfScheduler::Config cfg{sc.contracts, sc.topology.max_packet_bytes};
                disc_ = std::make_unique<RrTbfScheduler>(cfg, 0);
                break;
            }
            case DisciplineKind::csfq_tbm: {
                CsfqTbmScheduler::Config cfg;
                cfg.contracts = sc.contracts;
                cfg.capacity_bps = sc.topology.feeder_bps;
                cfg.k_s = sc.discipline.k_s;
                cfg.k_alpha_s = sc.discipline.k_alpha_s;
                cfg.fifo_bytes = sc.discipline.fifo_bytes;
                cfg.amendment_threshold_bytes = sc.discipline.amendment_threshold_bytes;
                cfg.seed = seed;
                disc_ = std::make_unique<CsfqTbmScheduler>(cfg, 0);
                break;
            }
        }

        for (std::size_t si = 0; si < sc.sources.size(); ++si) {
            const auto& binding = sc.sources[si];
            SourceState st{binding.subscriber, &binding.spec, nullptr};
            TimeNs start = 0;
            if (const auto* cbr = std::get_if<CbrSpec>(&binding.spec)) {
                start = cbr->start;
            } else if (const auto* burst = std::get_if<BurstSpec>(&binding.spec)) {
                start = burst->start;
            } else {
                const auto& tcp = std::get<TcpSpec>(binding.spec);
                st.tcp = std::make_unique<GreedyTcpSource>(tcp);
                tcp_source_of_sub_[binding.subscriber] = static_cast<int>(si);
                start = tcp.start;
            }
            sources_.push_back(std::move(st));
            if (start <= sc.horizon)
                push(start, kPrioArrival, EvKind::source_emit, static_cast<std::int32_t>(si), 0);
        }
    }

    EventLog run() {
        while (!pq_.empty()) {
            const Ev ev = pq_.top();
            pq_.pop();
            if (ev.t > sc_.horizon) break;
            clock_.advance_to(ev.t);
            dispatch(ev);
        }
        finish();
        return std::move(log_);
    }

  private:
    void push(TimeNs t, std::uint8_t prio, EvKind kind, std::int32_t a, std::int64_t b,
              std::int64_t c = 0) {
        pq_.push(Ev{t, prio, order_++, kind, a, b, c});
    }

    void dispatch(const Ev& ev) {
        switch (ev.kind) {
            case EvKind::source_emit: on_source_emit(ev); break;
            case EvKind::link_done: on_link_done(); break;
            case EvKind::timer:
                timer_pending_ = false;
                if (!link_busy_) try_transmit();
                break;
            case EvKind::tcp_ack: {
                auto& src = sources_[ev.a];
                src.tcp->on_ack(ev.b);
                tcp_pump(ev.a);
                break;
            }
            case EvKind::tcp_loss: {
                auto& src = sources_[ev.a];
                src.tcp->on_loss(ev.c, ev.b);
                tcp_pump(ev.a);
                break;
            }
        }
    }

    void on_source_emit(const Ev& ev) {
        auto& src = sources_[ev.a];
        if (const auto* cbr = std::get_if<CbrSpec>(src.spec)) {
            arrive(src.subscriber, cbr->packet_bytes, -1);
            if (auto next = cbr->emission(ev.b + 1); next && *next <= sc_.horizon)
                push(*next, kPrioArrival, EvKind::source_emit, ev.a, ev.b + 1);
        } else if (const auto* burst = std::get_if<BurstSpec>(src.spec)) {
            std::int64_t size = burst->packet_bytes;
            if (ev.b == burst->packet_count() - 1) {
                const std::int64_t rem = burst->burst_bytes % burst->packet_bytes;
                if (rem > 0) size = rem;
            }
            arrive(src.subscriber, size, -1);
            if (auto next = burst->emission(ev.b + 1); next && *next <= sc_.horizon)
                push(*next, kPrioArrival, EvKind::source_emit, ev.a, ev.b + 1);
        } else {
            tcp_pump(ev.a);
        }
    }

    void tcp_pump(int source_idx) {
        auto& src = sources_[source_idx];
        while (src.tcp->can_send()) {
            src.tcp->on_send();
            arrive(src.subscriber, src.tcp->mss_bytes(), source_idx);
        }
    }

    void arrive(int sub, std::int64_t size, int tcp_source_idx) {
        const TimeNs now = clock_.now();
        Packet pkt;
        pkt.subscriber = sub;
        pkt.size_bytes = static_cast<std::int32_t>(size);
        pkt.arrival = now;
        pkt.sequence_no = seq_counters_[sub]++;

        auto& tot = log_.totals[sub];
        tot.arrived_packets++;
        tot.arrived_bytes += size;

        const EnqueueResult res = disc_->enqueue(pkt, now);

        if (opts_.record_packets) {
            PacketRecord rec;
            rec.subscriber = pkt.subscriber;
            rec.size_bytes = pkt.size_bytes;
            rec.sequence_no = pkt.sequence_no;
            rec.arrival = now;
            rec.conformant = res.conformant;
            rec.drop = res.cause;
            if (res.outcome == EnqueueOutcome::accepted)
                pending_record_[sub].emplace(pkt.sequence_no, log_.records.size());
            log_.records.push_back(rec);
        }

        if (res.outcome == EnqueueOutcome::accepted) {
            if (!link_busy_) try_transmit();
        } else {
            tot.dropped_packets++;
            tot.dropped_bytes += size;
            tot.drops_by_cause[static_cast<int>(res.cause)]++;
            if (tcp_source_idx >= 0) {
                // Loss is detected one round trip after the send (missing ack).
                push(now + sc_.topology.rtt, kPrioArrival, EvKind::tcp_loss,
                     tcp_source_idx, size, pkt.sequence_no);
            }
        }
    }

    void try_transmit() {
        const TimeNs now = clock_.now();
        auto pkt = disc_->dequeue(now);
        if (!pkt) {
            if (disc_->has_eligible(now)) log_.work_conservation_violations++;
            if (auto wake = disc_->next_wakeup(now); wake && *wake <= sc_.horizon) {
                if (!timer_pending_ || *wake < timer_at_) {
                    timer_pending_ = true;
                    timer_at_ = *wake;
                    push(*wake > now ? *wake : now, kPrioTimer, EvKind::timer, 0, 0);
                }
            }
            return;
        }
        link_busy_ = true;
        in_flight_ = *pkt;
        const TimeNs done = now + transmission_time_ns(pkt->size_bytes, sc_.topology.feeder_bps);
        push(done, kPrioLinkDone, EvKind::link_done, 0, 0);
    }

    void on_link_done() {
        const TimeNs now = clock_.now();
        const Packet& pkt = in_flight_;
        auto& tot = log_.totals[pkt.subscriber];
        tot.delivered_packets++;
        tot.delivered_bytes += pkt.size_bytes;
        if (log_.bin_width > 0) {
            const auto bin = static_cast<std::size_t>(now / log_.bin_width);
            auto& bins = log_.bin_bytes[pkt.subscriber];
            if (bin < bins.size()) bins[bin] += pkt.size_bytes;
        }
        if (opts_.record_packets) {
            auto& pend = pending_record_[pkt.subscriber];
            if (auto it = pend.find(pkt.sequence_no); it != pend.end()) {
                log_.records[it->second].departure = now;
                pend.erase(it);
            }
        }
        const int src = tcp_source_of_sub_[pkt.subscriber];
        if (src >= 0)
            push(now + sc_.topology.rtt, kPrioArrival, EvKind::tcp_ack, src,
                 pkt.size_bytes, pkt.sequence_no);
        link_busy_ = false;
        try_transmit();
    }

    void finish() {
        for (int i = 0; i < log_.num_flows; ++i)
            log_.totals[i].residual_bytes = disc_->queued_bytes(i);
        if (link_busy_)
            log_.totals[in_flight_.subscriber].residual_bytes += in_flight_.size_bytes;
    }

    const Scenario& sc_;
    RunOptions opts_;
    EventLog log_;
    SimClock clock_;
    std::unique_ptr<Discipline> disc_;
    std::vector<SourceState> sources_;
    std::vector<std::int64_t> seq_counters_;
    std::vector<int> tcp_source_of_sub_;
    std::vector<std::unordered_map<std::int64_t, std::size_t>> pending_record_;

    std::priority_queue<Ev, std::vector<Ev>, EvLater> pq_;
    std::uint64_t order_ = 0;
    bool link_busy_ = false;
    Packet in_flight_;
    bool timer_pending_ = false;
    TimeNs timer_at_ = 0;
};

}  // namespace

std::vector<std::string> validate_scenario(const Scenario& sc) {
    std::vector<std::string> errors;
    const int n = static_cast<int>(sc.contracts.size());
    if (n == 0) errors.push_back("no subscriber contracts");
    if (sc.horizon <= 0) errors.push_back("horizon must be positive");
    if (sc.repetitions < 1) errors.push_back("repetitions must be >= 1");
    if (sc.topology.feeder_bps <= 0) errors.push_back("feeder rate must be positive");
    if (sc.topology.max_packet_bytes <= 0) errors.push_back("max packet size must be positive");
    for (int i = 0; i < n; ++i) {
        const auto& c = sc.contracts[i];
        if (c.token_rate_bps <= 0)
            errors.push_back("subscriber " + std::to_string(i) + ": token rate must be positive");
        if (c.bucket_bytes < sc.topology.max_packet_bytes)
            errors.push_back("subscriber " + std::to_string(i) + ": bucket smaller than max packet");
        if (c.queue_bytes <= 0)
            errors.push_back("subscriber " + std::to_string(i) + ": queue size must be positive");
    }
    std::vector<int> tcp_bound(n, 0), any_bound(n, 0);
    for (const auto& b : sc.sources) {
        if (b.subscriber < 0 || b.subscriber >= n) {
            errors.push_back("source bound to unknown subscriber " + std::to_string(b.subscriber));
            continue;
        }
        any_bound[b.subscriber]++;
        if (std::holds_alternative<TcpSpec>(b.spec)) tcp_bound[b.subscriber]++;
    }
    for (int i = 0; i < n; ++i)
        if (tcp_bound[i] > 0 && any_bound[i] > 1)
            errors.push_back("subscriber " + std::to_string(i) +
                             ": a TCP source must be the only source of its subscriber");
    if (sc.discipline.kind == DisciplineKind::csfq_tbm) {
        if (sc.discipline.k_s <= 0 || sc.discipline.k_alpha_s <= 0)
            errors.push_back("csfq averaging constants must be positive");
        if (sc.discipline.fifo_bytes <= 0) errors.push_back("csfq fifo size must be positive");
        if (sc.discipline.amendment_threshold_bytes <= 0)
            errors.push_back("csfq amendment threshold must be positive");
    }
    return errors;
}

EventLog run(const Scenario& scenario, std::uint64_t seed, const RunOptions& opts) {
    auto errors = validate_scenario(scenario);
    if (!errors.empty()) throw std::invalid_argument("invalid scenario: " + errors.front());
    Simulation sim(scenario, seed, opts);
    return sim.run();
}

}  // namespace accsim
