#include "accsim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace accsim {

const char* discipline_name(DisciplineKind k) {
    switch (k) {
        case DisciplineKind::rr_tbf: return "rr_tbf";
        case DisciplineKind::csfq_tbm: return "csfq_tbm";
        case DisciplineKind::drr_tbm: return "drr_tbm";
    }
    return "unknown";
}

bool discipline_from_name(const std::string& name, DisciplineKind& out) {
    if (name == "rr_tbf") { out = DisciplineKind::rr_tbf; return true; }
    if (name == "csfq_tbm") { out = DisciplineKind::csfq_tbm; return true; }
    if (name == "drr_tbm") { out = DisciplineKind::drr_tbm; return true; }
    return false;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Parser {
    ParseResult result;
    std::map<int, SubscriberContract> contracts_by_id;

    void error(int line, const std::string& msg) {
        result.errors.push_back("line " + std::to_string(line) + ": " + msg);
    }

    bool parse_number(const std::string& tok, double& out) {
        try {
            std::size_t pos = 0;
            out = std::stod(tok, &pos);
            return pos == tok.size();
        } catch (...) {
            return false;
        }
    }

    bool parse_int(const std::string& tok, std::int64_t& out) {
        double d;
        if (!parse_number(tok, d)) return false;
        out = static_cast<std::int64_t>(d + (d >= 0 ? 0.5 : -0.5));
        return true;
    }

    // "key=value" pairs into a map; complains about malformed tokens.
    std::map<std::string, std::string> kv(const std::vector<std::string>& toks,
                                          std::size_t from, int line) {
        std::map<std::string, std::string> m;
        for (std::size_t i = from; i < toks.size(); ++i) {
            const auto eq = toks[i].find('=');
            if (eq == std::string::npos) {
                error(line, "expected key=value, got '" + toks[i] + "'");
                continue;
            }
            m[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
        }
        return m;
    }

    void run(const std::string& text) {
        Scenario& sc = result.scenario;
        std::istringstream in(text);
        std::string raw;
        std::string section;
        int line = 0;
        bool saw_topology = false, saw_run = false, saw_discipline = false;

        while (std::getline(in, raw)) {
            ++line;
            std::string s = raw;
            if (auto hash = s.find('#'); hash != std::string::npos) s = s.substr(0, hash);
            s = trim(s);
            if (s.empty()) continue;

            if (s.front() == '[') {
                if (s.back() != ']') {
                    error(line, "malformed section header");
                    continue;
                }
                section = s.substr(1, s.size() - 2);
                if (section != "topology" && section != "discipline" && section != "contracts" &&
                    section != "sources" && section != "run")
                    error(line, "unknown section [" + section + "]");
                if (section == "topology") saw_topology = true;
                if (section == "run") saw_run = true;
                if (section == "discipline") saw_discipline = true;
                continue;
            }

            std::vector<std::string> toks;
            {
                std::istringstream ts(s);
                std::string tok;
                while (ts >> tok) toks.push_back(tok);
            }

            if (section == "topology" || section == "discipline" || section == "run") {
                // "key = value" lines
                std::string joined = s;
                joined.erase(std::remove_if(joined.begin(), joined.end(),
                                            [](char c) { return c == ' ' || c == '\t'; }),
                             joined.end());
                const auto eq = joined.find('=');
                if (eq == std::string::npos) {
                    error(line, "expected key = value");
                    continue;
                }
                handle_kv(section, joined.substr(0, eq), joined.substr(eq + 1), line);
            } else if (section == "contracts") {
                if (toks.size() != 4) {
                    error(line, "contract needs: id token_rate_bps bucket_bytes queue_bytes");
                    continue;
                }
                std::int64_t id, rate, bucket, queue;
                if (!parse_int(toks[0], id) || !parse_int(toks[1], rate) ||
                    !parse_int(toks[2], bucket) || !parse_int(toks[3], queue)) {
                    error(line, "contract fields must be numbers");
                    continue;
                }
                if (contracts_by_id.count(static_cast<int>(id))) {
                    error(line, "duplicate subscriber id " + std::to_string(id));
                    continue;
                }
                contracts_by_id[static_cast<int>(id)] = SubscriberContract{rate, bucket, queue};
            } else if (section == "sources") {
                parse_source(toks, line);
            } else {
                error(line, "content outside of any section");
            }
        }

        if (!saw_topology) result.errors.push_back("missing required section [topology]");
        if (!saw_discipline) result.errors.push_back("missing required section [discipline]");
        if (!saw_run) result.errors.push_back("missing required section [run]");
        if (contracts_by_id.empty()) result.errors.push_back("missing [contracts] entries");

        // Subscriber ids must be exactly 0..N-1.
        int expect = 0;
        for (const auto& [id, c] : contracts_by_id) {
            if (id != expect)
                result.errors.push_back("subscriber ids must be dense from 0; missing id " +
                                        std::to_string(expect));
            ++expect;
            sc.contracts.push_back(c);
        }
        const int n = static_cast<int>(sc.contracts.size());
        for (const auto& b : sc.sources)
            if (b.subscriber < 0 || b.subscriber >= n)
                result.errors.push_back("source bound to undeclared subscriber " +
                                        std::to_string(b.subscriber));
    }

    void handle_kv(const std::string& section, const std::string& key, const std::string& value,
                   int line) {
        Scenario& sc = result.scenario;
        double d = 0;
        if (!parse_number(value, d) && !(section == "discipline" && key == "type")) {
            error(line, "value for '" + key + "' is not a number");
            return;
        }
        if (section == "topology") {
            if (key == "feeder_bps") sc.topology.feeder_bps = static_cast<std::int64_t>(d);
            else if (key == "backbone_bps") sc.topology.backbone_bps = static_cast<std::int64_t>(d);
            else if (key == "uni_bps") sc.topology.uni_bps = static_cast<std::int64_t>(d);
            else if (key == "rtt_s") sc.topology.rtt = seconds_to_ns(d);
            else if (key == "max_packet_bytes") sc.topology.max_packet_bytes = static_cast<std::int64_t>(d);
            else error(line, "unknown topology key '" + key + "'");
        } else if (section == "discipline") {
            if (key == "type") {
                if (!discipline_from_name(value, sc.discipline.kind))
                    error(line, "unknown discipline '" + value + "'");
            } else if (key == "k_s") sc.discipline.k_s = d;
            else if (key == "k_alpha_s") sc.discipline.k_alpha_s = d;
            else if (key == "fifo_bytes") sc.discipline.fifo_bytes = static_cast<std::int64_t>(d);
            else if (key == "amendment_threshold_bytes")
                sc.discipline.amendment_threshold_bytes = static_cast<std::int64_t>(d);
            else error(line, "unknown discipline key '" + key + "'");
        } else {  // run
            if (key == "horizon_s") sc.horizon = seconds_to_ns(d);
            else if (key == "repetitions") sc.repetitions = static_cast<int>(d);
            else if (key == "seed") sc.seed = static_cast<std::uint64_t>(d);
            else error(line, "unknown run key '" + key + "'");
        }
    }

    void parse_source(const std::vector<std::string>& toks, int line) {
        if (toks.size() < 2) {
            error(line, "source needs: subscriber kind [key=value ...]");
            return;
        }
        std::int64_t sub;
        if (!parse_int(toks[0], sub)) {
            error(line, "source subscriber must be an integer");
            return;
        }
        const std::string& kind = toks[1];
        auto params = kv(toks, 2, line);
        auto take = [&](const char* key, double def, bool* present = nullptr) {
            auto it = params.find(key);
            if (it == params.end()) {
                if (present) *present = false;
                return def;
            }
            if (present) *present = true;
            double d = def;
            if (!parse_number(it->second, d)) error(line, std::string("bad number for ") + key);
            params.erase(it);
            return d;
        };

        SourceBinding b;
        b.subscriber = static_cast<int>(sub);
        if (kind == "cbr") {
            CbrSpec spec;
            spec.packet_bytes = static_cast<std::int64_t>(take("bytes", 1000));
            spec.period = seconds_to_ns(take("period_s", 0.0005));
            spec.start = seconds_to_ns(take("start_s", 0));
            bool has_stop = false;
            const double stop = take("stop_s", 0, &has_stop);
            if (has_stop) spec.stop = seconds_to_ns(stop);
            b.spec = spec;
        } else if (kind == "burst") {
            BurstSpec spec;
            spec.burst_bytes = static_cast<std::int64_t>(take("bytes", 10e6));
            spec.packet_bytes = static_cast<std::int64_t>(take("packet", 1000));
            spec.start = seconds_to_ns(take("start_s", 0));
            spec.injection_rate_bps = static_cast<std::int64_t>(take("rate_bps", 10e9));
            b.spec = spec;
        } else if (kind == "tcp") {
            TcpSpec spec;
            spec.mss_bytes = static_cast<std::int64_t>(take("mss", 1500));
            spec.start = seconds_to_ns(take("start_s", 0));
            b.spec = spec;
        } else {
            error(line, "unknown source kind '" + kind + "'");
            return;
        }
        for (const auto& leftover : params)
            error(line, "unknown source key '" + leftover.first + "'");
        result.scenario.sources.push_back(std::move(b));
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

ParseResult parse_scenario(const std::string& text) {
    Parser p;
    p.run(text);
    return std::move(p.result);
}

ParseResult load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ParseResult r;
        r.errors.push_back("cannot open scenario file: " + path);
        return r;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
    std::ostringstream out;
    out << "[topology]\n";
    out << "feeder_bps = " << s.topology.feeder_bps << "\n";
    out << "backbone_bps = " << s.topology.backbone_bps << "\n";
    out << "uni_bps = " << s.topology.uni_bps << "\n";
    out << "rtt_s = " << fmt(ns_to_seconds(s.topology.rtt)) << "\n";
    out << "max_packet_bytes = " << s.topology.max_packet_bytes << "\n\n";

    out << "[discipline]\n";
    out << "type = " << discipline_name(s.discipline.kind) << "\n";
    out << "k_s = " << fmt(s.discipline.k_s) << "\n";
    out << "k_alpha_s = " << fmt(s.discipline.k_alpha_s) << "\n";
    out << "fifo_bytes = " << s.discipline.fifo_bytes << "\n";
    out << "amendment_threshold_bytes = " << s.discipline.amendment_threshold_bytes << "\n\n";

    out << "[contracts]\n";
    for (std::size_t i = 0; i < s.contracts.size(); ++i) {
        const auto& c = s.contracts[i];
        out << i << " " << c.token_rate_bps << " " << c.bucket_bytes << " " << c.queue_bytes
            << "\n";
    }
    out << "\n[sources]\n";
    for (const auto& b : s.sources) {
        out << b.subscriber << " ";
        if (const auto* cbr = std::get_if<CbrSpec>(&b.spec)) {
            out << "cbr bytes=" << cbr->packet_bytes
                << " period_s=" << fmt(ns_to_seconds(cbr->period))
                << " start_s=" << fmt(ns_to_seconds(cbr->start));
            if (cbr->stop) out << " stop_s=" << fmt(ns_to_seconds(*cbr->stop));
        } else if (const auto* burst = std::get_if<BurstSpec>(&b.spec)) {
            out << "burst bytes=" << burst->burst_bytes << " packet=" << burst->packet_bytes
                << " start_s=" << fmt(ns_to_seconds(burst->start))
                << " rate_bps=" << burst->injection_rate_bps;
        } else {
            const auto& tcp = std::get<TcpSpec>(b.spec);
            out << "tcp mss=" << tcp.mss_bytes << " start_s=" << fmt(ns_to_seconds(tcp.start));
        }
        out << "\n";
    }
    out << "\n[run]\n";
    out << "horizon_s = " << fmt(ns_to_seconds(s.horizon)) << "\n";
    out << "repetitions = " << s.repetitions << "\n";
    out << "seed = " << s.seed << "\n";
    return out.str();
}

bool operator==(const Scenario& a, const Scenario& b) {
    auto topo = [](const Topology& t) {
        return std::tuple(t.feeder_bps, t.backbone_bps, t.uni_bps, t.rtt, t.max_packet_bytes);
    };
    auto disc = [](const DisciplineParams& d) {
        return std::tuple(d.kind, d.k_s, d.k_alpha_s, d.fifo_bytes, d.amendment_threshold_bytes);
    };
    auto contract = [](const SubscriberContract& c) {
        return std::tuple(c.token_rate_bps, c.bucket_bytes, c.queue_bytes);
    };
    if (topo(a.topology) != topo(b.topology) || disc(a.discipline) != disc(b.discipline))
        return false;
    if (a.horizon != b.horizon || a.repetitions != b.repetitions || a.seed != b.seed) return false;
    if (a.contracts.size() != b.contracts.size() || a.sources.size() != b.sources.size())
        return false;
    for (std::size_t i = 0; i < a.contracts.size(); ++i)
        if (contract(a.contracts[i]) != contract(b.contracts[i])) return false;
    for (std::size_t i = 0; i < a.sources.size(); ++i) {
        const auto& x = a.sources[i];
        const auto& y = b.sources[i];
        if (x.subscriber != y.subscriber || x.spec.index() != y.spec.index()) return false;
        if (const auto* cx = std::get_if<CbrSpec>(&x.spec)) {
            const auto* cy = std::get_if<CbrSpec>(&y.spec);
            if (std::tuple(cx->packet_bytes, cx->period, cx->start, cx->stop) !=
                std::tuple(cy->packet_bytes, cy->period, cy->start, cy->stop))
                return false;
        } else if (const auto* bx = std::get_if<BurstSpec>(&x.spec)) {
            const auto* by = std::get_if<BurstSpec>(&y.spec);
            if (std::tuple(bx->burst_bytes, bx->packet_bytes, bx->start, bx->injection_rate_bps) !=
                std::tuple(by->burst_bytes, by->packet_bytes, by->start, by->injection_rate_bps))
                return false;
        } else {
            const auto& tx = std::get<TcpSpec>(x.spec);
            const auto& ty = std::get<TcpSpec>(y.spec);
            if (std::tuple(tx.mss_bytes, tx.start) != std::tuple(ty.mss_bytes, ty.start))
                return false;
        }
    }
    return true;
}

}  // namespace accsim
