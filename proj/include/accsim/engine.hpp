#ifndef ACCSIM_ENGINE_HPP
#define ACCSIM_ENGINE_HPP

#include <cstdint>
#include <vector>

#include "accsim/core.hpp"
#include "accsim/discipline.hpp"
#include "accsim/scenario.hpp"

namespace accsim {

struct PacketRecord {
    std::int32_t subscriber = 0;
    std::int32_t size_bytes = 0;
    std::int64_t sequence_no = 0;
    TimeNs arrival = 0;
    TimeNs departure = -1;          // -1 while queued or dropped
    bool conformant = false;
    DropCause drop = DropCause::none;

    bool delivered() const { return departure >= 0; }

    bool operator==(const PacketRecord&) const = default;
};

struct FlowTotals {
    std::int64_t arrived_packets = 0;
    std::int64_t arrived_bytes = 0;
    std::int64_t delivered_packets = 0;
    std::int64_t delivered_bytes = 0;
    std::int64_t dropped_packets = 0;
    std::int64_t dropped_bytes = 0;
    std::int64_t residual_bytes = 0;     // still queued at end of run
    std::int64_t drops_by_cause[6] = {0, 0, 0, 0, 0, 0};
};

struct EventLog {
    int num_flows = 0;
    TimeNs horizon = 0;
    TimeNs bin_width = 0;                          // 0 = no binning
    std::vector<std::vector<std::int64_t>> bin_bytes;  // [flow][bin], departures
    std::vector<PacketRecord> records;             // only when recorded
    std::vector<FlowTotals> totals;
    std::int64_t work_conservation_violations = 0;
};

struct RunOptions {
    bool record_packets = false;
    TimeNs bin_width = kNsPerSec;    // 1-s bins by default
};

// One deterministic discrete-event run: (scenario, seed) fully determine
// the log. Repetitions differ only through the seed.
EventLog run(const Scenario& scenario, std::uint64_t seed, const RunOptions& opts = {});

// Validation shared with the CLI: empty list on success.
std::vector<std::string> validate_scenario(const Scenario& scenario);

}  // namespace accsim

#endif  // ACCSIM_ENGINE_HPP
