#ifndef ACCSIM_SCENARIO_HPP
#define ACCSIM_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "accsim/core.hpp"
#include "accsim/traffic.hpp"

namespace accsim {

enum class DisciplineKind : std::uint8_t { rr_tbf, csfq_tbm, drr_tbm };

const char* discipline_name(DisciplineKind k);
bool discipline_from_name(const std::string& name, DisciplineKind& out);

struct Topology {
    std::int64_t feeder_bps = 100'000'000;       // shared access link C
    std::int64_t backbone_bps = 10'000'000'000;
    std::int64_t uni_bps = 100'000'000;
    TimeNs rtt = 10'000'000;                      // 10 ms end to end
    std::int64_t max_packet_bytes = 1500;
};

struct DisciplineParams {
    DisciplineKind kind = DisciplineKind::drr_tbm;
    // CSFQ only:
    double k_s = 0.1;
    double k_alpha_s = 0.2;
    std::int64_t fifo_bytes = 16'000'000;
    std::int64_t amendment_threshold_bytes = 64'000;
};

struct SourceBinding {
    int subscriber = 0;
    SourceSpec spec;
};

struct Scenario {
    Topology topology;
    std::vector<SubscriberContract> contracts;
    std::vector<SourceBinding> sources;
    DisciplineParams discipline;
    TimeNs horizon = 0;
    int repetitions = 1;
    std::uint64_t seed = 1;
};

struct ParseResult {
    Scenario scenario;
    std::vector<std::string> errors;   // all validation errors, not just the first

    bool ok() const { return errors.empty(); }
};

// Line-oriented text format with [topology] [discipline] [contracts]
// [sources] [run] sections; '#' starts a comment.
ParseResult parse_scenario(const std::string& text);
ParseResult load_scenario(const std::string& path);

std::string serialize_scenario(const Scenario& s);

bool operator==(const Scenario& a, const Scenario& b);

}  // namespace accsim

#endif  // ACCSIM_SCENARIO_HPP
