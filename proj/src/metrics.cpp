#include "accsim/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace accsim {

double student_t_975(int dof) {
    // Two-sided 95% quantiles; beyond 30 dof the normal value is close enough.
    static constexpr double table[] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (dof < 1) throw std::invalid_argument("student_t_975: dof must be >= 1");
    if (dof <= 30) return table[dof - 1];
    return 1.96;
}

ThroughputSeries bin_throughput(const EventLog& log, TimeNs bin_width) {
    if (bin_width <= 0) throw std::invalid_argument("bin_throughput: bin width must be positive");
    ThroughputSeries series;
    series.bin_width = bin_width;
    const auto nbins = static_cast<std::size_t>(log.horizon / bin_width) + 1;
    series.bps.assign(log.num_flows, std::vector<double>(nbins, 0.0));
    const double width_s = ns_to_seconds(bin_width);

    if (!log.records.empty()) {
        for (const auto& rec : log.records) {
            if (!rec.delivered()) continue;
            const auto bin = static_cast<std::size_t>(rec.departure / bin_width);
            if (bin < nbins) series.bps[rec.subscriber][bin] += rec.size_bytes * 8.0 / width_s;
        }
        return series;
    }

    if (log.bin_width <= 0 || bin_width % log.bin_width != 0)
        throw std::invalid_argument(
            "bin_throughput: no records and requested width is not a multiple of the engine bin width");
    const auto factor = static_cast<std::size_t>(bin_width / log.bin_width);
    for (int f = 0; f < log.num_flows; ++f) {
        const auto& src = log.bin_bytes[f];
        for (std::size_t b = 0; b < src.size(); ++b) {
            const std::size_t bin = b / factor;
            if (bin < nbins) series.bps[f][bin] += static_cast<double>(src[b]) * 8.0 / width_s;
        }
    }
    return series;
}

double window_mean_bps(const EventLog& log, int flow, TimeNs t0, TimeNs t1) {
    if (t1 <= t0) throw std::invalid_argument("window_mean_bps: empty window");
    std::int64_t bytes = 0;
    if (!log.records.empty()) {
        for (const auto& rec : log.records) {
            if (rec.subscriber != flow || !rec.delivered()) continue;
            if (rec.departure >= t0 && rec.departure < t1) bytes += rec.size_bytes;
        }
    } else {
        if (log.bin_width <= 0 || t0 % log.bin_width != 0 || t1 % log.bin_width != 0)
            throw std::invalid_argument("window_mean_bps: window not aligned to engine bins");
        const auto& bins = log.bin_bytes[flow];
        for (TimeNs b = t0 / log.bin_width; b < t1 / log.bin_width; ++b)
            if (static_cast<std::size_t>(b) < bins.size()) bytes += bins[b];
    }
    return static_cast<double>(bytes) * 8.0 / ns_to_seconds(t1 - t0);
}

WindowSummary summarize(TimeNs t0, TimeNs t1, const std::vector<EventLog>& runs) {
    if (runs.empty()) throw std::invalid_argument("summarize: no runs");
    if (t0 < 0 || t1 > runs.front().horizon || t1 <= t0)
        throw std::invalid_argument("summarize: window outside simulated horizon");

    const int nflows = runs.front().num_flows;
    const int nruns = static_cast<int>(runs.size());
    WindowSummary sum;
    sum.t0 = t0;
    sum.t1 = t1;
    sum.mean_bps.assign(nflows, 0.0);
    sum.ci95_bps.assign(nflows, 0.0);

    for (int f = 0; f < nflows; ++f) {
        std::vector<double> means(nruns);
        double m = 0;
        for (int r = 0; r < nruns; ++r) {
            means[r] = window_mean_bps(runs[r], f, t0, t1);
            m += means[r];
        }
        m /= nruns;
        sum.mean_bps[f] = m;
        if (nruns >= 2) {
            double ss = 0;
            for (double v : means) ss += (v - m) * (v - m);
            const double stderr_ = std::sqrt(ss / (nruns - 1)) / std::sqrt(static_cast<double>(nruns));
            sum.ci95_bps[f] = student_t_975(nruns - 1) * stderr_;
        }
    }
    return sum;
}

}  // namespace accsim
