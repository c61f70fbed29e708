#ifndef ACCSIM_METRICS_HPP
#define ACCSIM_METRICS_HPP

#include <cstdint>
#include <vector>

#include "accsim/core.hpp"
#include "accsim/engine.hpp"

namespace accsim {

struct ThroughputSeries {
    TimeNs bin_width = 0;
    std::vector<std::vector<double>> bps;   // [flow][bin]
};

// Departure bytes attributed to the half-open bin containing the departure
// timestamp. Uses per-packet records when present, otherwise the engine's
// prebinned counts (bin_width must then divide the engine bin width).
ThroughputSeries bin_throughput(const EventLog& log, TimeNs bin_width);

struct WindowSummary {
    TimeNs t0 = 0, t1 = 0;
    std::vector<double> mean_bps;   // per flow, across-repetition mean
    std::vector<double> ci95_bps;   // 95% CI half-width (Student t, n-1 dof)
};

// Per-run window means from delivered bytes in [t0, t1); CI across runs.
// Throws std::invalid_argument when the window lies outside the horizon.
WindowSummary summarize(TimeNs t0, TimeNs t1, const std::vector<EventLog>& runs);

// Delivered bits/second for one flow of one run over [t0, t1).
double window_mean_bps(const EventLog& log, int flow, TimeNs t0, TimeNs t1);

double student_t_975(int dof);

}  // namespace accsim

#endif  // ACCSIM_METRICS_HPP
