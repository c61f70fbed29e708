// accsim command line front end.
//
//   accsim run <scenario> [overrides]   simulate and write CSV results
//   accsim oracle ...                   analytic fair-rate solver
//   accsim report <series.csv> ...      re-summarize an existing series

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "accsim/engine.hpp"
#include "accsim/fair_rate.hpp"
#include "accsim/metrics.hpp"
#include "accsim/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace accsim;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// "a:b" in seconds.
bool parse_window(const std::string& s, TimeNs& t0, TimeNs& t1) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) return false;
    try {
        t0 = seconds_to_ns(std::stod(s.substr(0, colon)));
        t1 = seconds_to_ns(std::stod(s.substr(colon + 1)));
    } catch (...) {
        return false;
    }
    return t1 > t0;
}

// "2.5e6x4,5e6,7.5e6x2" -> {2.5e6, 2.5e6, 2.5e6, 2.5e6, 5e6, 7.5e6, 7.5e6}
bool parse_value_list(const std::string& s, std::vector<double>& out) {
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) return false;
        std::size_t reps = 1;
        std::string value = item;
        if (const auto x = item.rfind('x'); x != std::string::npos && x > 0) {
            try {
                std::size_t pos = 0;
                const long n = std::stol(item.substr(x + 1), &pos);
                if (pos == item.size() - x - 1 && n > 0) {
                    reps = static_cast<std::size_t>(n);
                    value = item.substr(0, x);
                }
            } catch (...) {
                // no repeat suffix; fall through and parse the whole token
            }
        }
        try {
            std::size_t pos = 0;
            const double v = std::stod(value, &pos);
            if (pos != value.size()) return false;
            out.insert(out.end(), reps, v);
        } catch (...) {
            return false;
        }
    }
    return !out.empty();
}

void write_series_csv(const fs::path& path, const std::vector<ThroughputSeries>& series) {
    std::ofstream out(path);
    out << "run,flow,bin_start_s,throughput_bps\n";
    for (std::size_t r = 0; r < series.size(); ++r) {
        const auto& s = series[r];
        for (std::size_t f = 0; f < s.bps.size(); ++f)
            for (std::size_t b = 0; b < s.bps[f].size(); ++b)
                out << r << "," << f << ","
                    << num(ns_to_seconds(static_cast<TimeNs>(b) * s.bin_width)) << ","
                    << num(s.bps[f][b]) << "\n";
    }
}

void write_summary_csv(const fs::path& path, const WindowSummary& sum) {
    std::ofstream out(path);
    out << "flow,mean_bps,ci95_bps\n";
    for (std::size_t f = 0; f < sum.mean_bps.size(); ++f)
        out << f << "," << num(sum.mean_bps[f]) << "," << num(sum.ci95_bps[f]) << "\n";
}

int cmd_run(const std::string& scenario_path, const std::string& discipline,
            int repetitions, std::int64_t seed, double bin_s, const std::string& window,
            bool dump_packets, std::string out_dir, int jobs) {
    auto parsed = load_scenario(scenario_path);
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors) std::cerr << "scenario: " << e << "\n";
        return 2;
    }
    Scenario sc = parsed.scenario;

    if (!discipline.empty() && !discipline_from_name(discipline, sc.discipline.kind)) {
        std::cerr << "unknown discipline '" << discipline << "'\n";
        return 2;
    }
    if (repetitions > 0) sc.repetitions = repetitions;
    if (seed >= 0) sc.seed = static_cast<std::uint64_t>(seed);

    const auto errors = validate_scenario(sc);
    if (!errors.empty()) {
        for (const auto& e : errors) std::cerr << "scenario: " << e << "\n";
        return 2;
    }

    TimeNs t0 = 0, t1 = sc.horizon;
    if (!window.empty() && !parse_window(window, t0, t1)) {
        std::cerr << "bad --window, expected start:end in seconds\n";
        return 2;
    }

    RunOptions opts;
    opts.record_packets = dump_packets;
    opts.bin_width = seconds_to_ns(bin_s);
    if (opts.bin_width <= 0) {
        std::cerr << "bad --bin\n";
        return 2;
    }

    if (out_dir.empty()) {
        if (const char* env = std::getenv("ACCSIM_OUT_DIR")) out_dir = env;
        else out_dir = ".";
    }
    fs::create_directories(out_dir);

    std::vector<EventLog> logs(sc.repetitions);
    {
        std::mutex mtx;
        int next = 0;
        auto worker = [&] {
            for (;;) {
                int rep;
                {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (next >= sc.repetitions) return;
                    rep = next++;
                }
                logs[rep] = run(sc, sc.seed + static_cast<std::uint64_t>(rep), opts);
            }
        };
        const int n = std::max(1, std::min(jobs, sc.repetitions));
        std::vector<std::thread> pool;
        for (int i = 1; i < n; ++i) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    }

    std::vector<ThroughputSeries> series;
    series.reserve(logs.size());
    for (const auto& log : logs) series.push_back(bin_throughput(log, opts.bin_width));
    const WindowSummary sum = summarize(t0, t1, logs);

    const fs::path dir(out_dir);
    write_series_csv(dir / "series.csv", series);
    write_summary_csv(dir / "summary.csv", sum);

    if (dump_packets) {
        std::ofstream out(dir / "packets.csv");
        out << "run,flow,sequence_no,size_bytes,arrival_s,departure_s,conformant,drop\n";
        for (std::size_t r = 0; r < logs.size(); ++r)
            for (const auto& rec : logs[r].records)
                out << r << "," << rec.subscriber << "," << rec.sequence_no << ","
                    << rec.size_bytes << "," << num(ns_to_seconds(rec.arrival)) << ","
                    << (rec.delivered() ? num(ns_to_seconds(rec.departure)) : std::string("-"))
                    << "," << (rec.conformant ? 1 : 0) << "," << drop_cause_name(rec.drop)
                    << "\n";
    }

    json manifest;
    manifest["scenario"] = scenario_path;
    manifest["scenario_fnv1a"] = fnv1a(serialize_scenario(sc));
    manifest["discipline"] = discipline_name(sc.discipline.kind);
    manifest["seed"] = sc.seed;
    manifest["repetitions"] = sc.repetitions;
    manifest["bin_s"] = ns_to_seconds(opts.bin_width);
    manifest["window_s"] = {ns_to_seconds(t0), ns_to_seconds(t1)};
    manifest["flows"] = logs.empty() ? 0 : logs[0].num_flows;
    json totals = json::array();
    for (int f = 0; f < (logs.empty() ? 0 : logs[0].num_flows); ++f) {
        std::int64_t arrived = 0, delivered = 0, dropped = 0;
        std::int64_t violations = 0;
        for (const auto& log : logs) {
            arrived += log.totals[f].arrived_bytes;
            delivered += log.totals[f].delivered_bytes;
            dropped += log.totals[f].dropped_bytes;
            violations += log.work_conservation_violations;
        }
        totals.push_back({{"flow", f},
                          {"arrived_bytes", arrived},
                          {"delivered_bytes", delivered},
                          {"dropped_bytes", dropped}});
        manifest["work_conservation_violations"] = violations;
    }
    manifest["totals"] = std::move(totals);
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";

    for (std::size_t f = 0; f < sum.mean_bps.size(); ++f)
        std::cout << "flow " << f << ": " << num(sum.mean_bps[f] / 1e6) << " Mb/s +- "
                  << num(sum.ci95_bps[f] / 1e6) << "\n";
    return 0;
}

int cmd_oracle(double capacity, const std::string& demands_s, const std::string& weights_s) {
    FairRateProblem p;
    p.excess_capacity_bps = capacity;
    if (!parse_value_list(demands_s, p.demands_bps)) {
        std::cerr << "bad --demands\n";
        return 2;
    }
    if (weights_s.empty()) {
        p.weights.assign(p.demands_bps.size(), 1.0);
    } else if (!parse_value_list(weights_s, p.weights)) {
        std::cerr << "bad --weights\n";
        return 2;
    }
    const auto sol = solve_alpha(p);
    std::cout << "alpha_bps_per_weight," << num(sol.alpha) << "\n";
    std::cout << "saturated," << (sol.saturated ? 1 : 0) << "\n";
    std::cout << "flow,allocation_bps\n";
    for (std::size_t i = 0; i < sol.allocations_bps.size(); ++i)
        std::cout << i << "," << num(sol.allocations_bps[i]) << "\n";
    return 0;
}

int cmd_report(const std::string& series_path, const std::string& window) {
    std::ifstream in(series_path);
    if (!in) {
        std::cerr << "cannot open " << series_path << "\n";
        return 2;
    }
    TimeNs t0 = 0, t1 = 0;
    const bool windowed = !window.empty();
    if (windowed && !parse_window(window, t0, t1)) {
        std::cerr << "bad --window, expected start:end in seconds\n";
        return 2;
    }

    // (run, flow) -> window-mean accumulation over matching bins.
    std::map<std::pair<long, long>, std::pair<double, long>> acc;
    long max_flow = -1;
    std::string line;
    std::getline(in, line);  // header
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        long run, flow;
        double bin_start, bps;
        if (std::sscanf(line.c_str(), "%ld,%ld,%lf,%lf", &run, &flow, &bin_start, &bps) != 4) {
            std::cerr << series_path << ":" << lineno << ": malformed row\n";
            return 2;
        }
        const TimeNs t = seconds_to_ns(bin_start);
        if (windowed && (t < t0 || t >= t1)) continue;
        auto& a = acc[{run, flow}];
        a.first += bps;
        a.second += 1;
        max_flow = std::max(max_flow, flow);
    }
    if (max_flow < 0) {
        std::cerr << "no rows in the requested window\n";
        return 2;
    }

    std::cout << "flow,mean_bps,ci95_bps\n";
    for (long f = 0; f <= max_flow; ++f) {
        std::vector<double> means;
        for (const auto& [key, a] : acc)
            if (key.second == f && a.second > 0)
                means.push_back(a.first / static_cast<double>(a.second));
        const long n = static_cast<long>(means.size());
        double mean = 0;
        for (double m : means) mean += m;
        mean /= static_cast<double>(n);
        double ci = 0;
        if (n > 1) {
            double ss = 0;
            for (double m : means) ss += (m - mean) * (m - mean);
            const double sd = std::sqrt(ss / static_cast<double>(n - 1));
            ci = student_t_975(static_cast<int>(n - 1)) * sd / std::sqrt(static_cast<double>(n));
        }
        std::cout << f << "," << num(mean) << "," << num(ci) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shared-access link scheduling simulator"};
    app.require_subcommand(1);

    std::string scenario_path, discipline, window, out_dir;
    int repetitions = 0;
    std::int64_t seed = -1;
    double bin_s = 1.0;
    bool dump_packets = false;
    int jobs = 1;

    auto* run_cmd = app.add_subcommand("run", "simulate a scenario");
    run_cmd->add_option("scenario", scenario_path, "scenario file")->required();
    run_cmd->add_option("--discipline", discipline, "rr_tbf | csfq_tbm | drr_tbm");
    run_cmd->add_option("--repetitions", repetitions, "override repetition count");
    run_cmd->add_option("--seed", seed, "override base seed");
    run_cmd->add_option("--bin", bin_s, "throughput bin width in seconds");
    run_cmd->add_option("--window", window, "summary window start:end in seconds");
    run_cmd->add_flag("--dump-packets", dump_packets, "write per-packet records");
    run_cmd->add_option("--out", out_dir, "output directory (default $ACCSIM_OUT_DIR or .)");
    run_cmd->add_option("--jobs", jobs, "parallel repetitions");

    double capacity = 0;
    std::string demands_s, weights_s;
    auto* oracle_cmd = app.add_subcommand("oracle", "analytic fair-rate allocation");
    oracle_cmd->add_option("--capacity", capacity, "excess capacity in b/s")->required();
    oracle_cmd->add_option("--demands", demands_s, "demand list, e.g. 16e6x12")->required();
    oracle_cmd->add_option("--weights", weights_s, "weight list (default all 1)");

    std::string series_path, report_window;
    auto* report_cmd = app.add_subcommand("report", "summarize an existing series.csv");
    report_cmd->add_option("series", series_path, "series.csv from a run")->required();
    report_cmd->add_option("--window", report_window, "window start:end in seconds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed())
            return cmd_run(scenario_path, discipline, repetitions, seed, bin_s, window,
                           dump_packets, out_dir, jobs);
        if (oracle_cmd->parsed()) return cmd_oracle(capacity, demands_s, weights_s);
        return cmd_report(series_path, report_window);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
