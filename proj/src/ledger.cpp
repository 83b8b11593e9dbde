#include "chosim/ledger.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <tuple>

#include "chosim/errors.hpp"

namespace chosim {

std::string format_compact(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace {

constexpr const char* kKindNames[] = {
    "MEAS_REPORT_PREP", "CHO_PREPARE", "CHO_RELEASE", "CHO_REPLACE",
    "FCHO_CFG_REQUEST", "FCHO_CFG_MODIFICATION", "HO_EXEC_START", "HO_SUCCESS",
    "HOF", "RLF", "REESTABLISH",
};
constexpr int kNumKinds = 11;

constexpr const char* kHeader = "time_ms,ue_id,kind,source_cell,target_cell";

template <typename T>
T parse_num(const std::string& text, const std::string& where) {
    T out{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError(where + ": cannot parse number '" + text + "'");
    }
    return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& text, const std::string& where) {
    std::vector<std::int64_t> out;
    if (text.empty()) return out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t semi = text.find(';', start);
        const std::string tok =
            text.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
        out.push_back(parse_num<std::int64_t>(tok, where));
        if (semi == std::string::npos) break;
        start = semi + 1;
    }
    return out;
}

std::string join_int_list(const std::vector<std::int64_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out.push_back(';');
        out += std::to_string(v[i]);
    }
    return out;
}

} // namespace

const char* to_string(EventKind kind) {
    return kKindNames[static_cast<int>(kind)];
}

EventKind event_kind_from_string(const std::string& s) {
    for (int k = 0; k < kNumKinds; ++k) {
        if (s == kKindNames[k]) return static_cast<EventKind>(k);
    }
    throw ConfigError("unknown event kind '" + s + "'");
}

void EventLedger::record(const SignalEvent& ev) {
    if (finalized_) {
        throw ConsistencyError("ledger already finalized");
    }
    if (ev.ue_id < 0) {
        throw ConsistencyError("event with negative ue_id");
    }
    const auto ue = static_cast<std::size_t>(ev.ue_id);
    if (ue >= last_time_.size()) {
        last_time_.resize(ue + 1, INT64_MIN);
        pending_exec_target_.resize(ue + 1, -1);
    }
    if (ev.time_ms < last_time_[ue]) {
        throw ConsistencyError("time regression in ue " + std::to_string(ev.ue_id) +
                               " stream: " + std::to_string(ev.time_ms) + " after " +
                               std::to_string(last_time_[ue]));
    }
    last_time_[ue] = ev.time_ms;

    if (ev.kind == EventKind::HoExecStart) {
        pending_exec_target_[ue] = ev.target_cell;
    } else if (ev.kind == EventKind::HoSuccess) {
        if (pending_exec_target_[ue] != ev.target_cell) {
            throw ConsistencyError("HO_SUCCESS for ue " + std::to_string(ev.ue_id) +
                                   " toward cell " + std::to_string(ev.target_cell) +
                                   " without matching HO_EXEC_START");
        }
        pending_exec_target_[ue] = -1;
    } else if (ev.kind == EventKind::Hof) {
        pending_exec_target_[ue] = -1;
    }

    events_.push_back(ev);
}

void EventLedger::finalize() {
    std::stable_sort(events_.begin(), events_.end(),
                     [](const SignalEvent& a, const SignalEvent& b) {
                         return std::tuple(a.time_ms, a.ue_id, static_cast<int>(a.kind)) <
                                std::tuple(b.time_ms, b.ue_id, static_cast<int>(b.kind));
                     });
    finalized_ = true;
}

OverheadCounters count_overhead(const EventLedger& ledger, int n_ue,
                                double sim_minutes, std::int64_t ignore_at_or_before_ms) {
    if (n_ue <= 0 || sim_minutes <= 0.0) {
        throw DomainError("overhead normalization needs n_ue > 0 and sim_minutes > 0");
    }
    OverheadCounters oc;
    for (const SignalEvent& ev : ledger.events()) {
        if (ev.time_ms <= ignore_at_or_before_ms) continue;
        switch (ev.kind) {
        case EventKind::ChoPrepare: ++oc.prepares; break;
        case EventKind::ChoRelease: ++oc.releases; break;
        case EventKind::ChoReplace: ++oc.replaces; break;
        case EventKind::FchoCfgRequest: ++oc.fcho_requests; break;
        case EventKind::FchoCfgModification: ++oc.fcho_modifications; break;
        default: break;
        }
    }
    const double norm = static_cast<double>(n_ue) * sim_minutes;
    oc.prepare_per_ue_min = static_cast<double>(oc.prepares) / norm;
    oc.release_per_ue_min = static_cast<double>(oc.releases) / norm;
    oc.replace_per_ue_min = static_cast<double>(oc.replaces) / norm;
    oc.fcho_cfg_per_ue_min =
        static_cast<double>(oc.fcho_requests + oc.fcho_modifications) / norm;
    oc.total_cho_events_per_ue_min =
        static_cast<double>(oc.prepares + oc.releases + oc.replaces) / norm;
    return oc;
}

void write_events_csv(const std::string& path, const EventLedger& ledger,
                      const RunMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");

    out << "# config_hash=" << meta.config_hash << "\n";
    out << "# seed=" << meta.seed << "\n";
    out << "# mode=" << meta.mode << "\n";
    out << "# scheme=" << meta.scheme << "\n";
    out << "# speed_kmh=" << format_compact(meta.speed_kmh) << "\n";
    out << "# n_ue=" << meta.n_ue << "\n";
    out << "# n_cells=" << meta.n_cells << "\n";
    out << "# duration_ms=" << meta.duration_ms << "\n";
    out << "# warmup_ms=" << meta.warmup_ms << "\n";
    out << "# t_fh_ms=" << meta.t_fh_ms << "\n";
    out << "# outage_ms=" << join_int_list(meta.outage_ms) << "\n";
    out << "# resv_ms=" << join_int_list(meta.resv_ms) << "\n";
    out << kHeader << "\n";
    for (const SignalEvent& ev : ledger.events()) {
        out << ev.time_ms << ',' << ev.ue_id << ',' << to_string(ev.kind) << ','
            << ev.source_cell << ',' << ev.target_cell << "\n";
    }
    if (!out) throw ConfigError("write failed for '" + path + "'");
}

ParsedRun read_events_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");

    ParsedRun run;
    std::string line;
    int line_no = 0;
    bool header_seen = false;

    auto where = [&]() { return path + " line " + std::to_string(line_no); };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        if (line.rfind("# ", 0) == 0) {
            if (header_seen) throw ConfigError(where() + ": metadata after header");
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(where() + ": malformed metadata line");
            }
            const std::string key = line.substr(2, eq - 2);
            const std::string val = line.substr(eq + 1);
            if (key == "config_hash") run.meta.config_hash = val;
            else if (key == "seed") run.meta.seed = parse_num<std::uint64_t>(val, where());
            else if (key == "mode") run.meta.mode = val;
            else if (key == "scheme") run.meta.scheme = val;
            else if (key == "speed_kmh") run.meta.speed_kmh = parse_num<double>(val, where());
            else if (key == "n_ue") run.meta.n_ue = parse_num<int>(val, where());
            else if (key == "n_cells") run.meta.n_cells = parse_num<int>(val, where());
            else if (key == "duration_ms") run.meta.duration_ms = parse_num<std::int64_t>(val, where());
            else if (key == "warmup_ms") run.meta.warmup_ms = parse_num<std::int64_t>(val, where());
            else if (key == "t_fh_ms") run.meta.t_fh_ms = parse_num<std::int64_t>(val, where());
            else if (key == "outage_ms") run.meta.outage_ms = parse_int_list(val, where());
            else if (key == "resv_ms") run.meta.resv_ms = parse_int_list(val, where());
            else throw ConfigError(where() + ": unknown metadata key '" + key + "'");
            continue;
        }

        if (!header_seen) {
            if (line != kHeader) {
                throw ConfigError(where() + ": expected header '" + kHeader + "'");
            }
            header_seen = true;
            continue;
        }

        SignalEvent ev;
        std::string fields[5];
        std::size_t start = 0;
        for (int f = 0; f < 5; ++f) {
            const std::size_t comma = line.find(',', start);
            if (f < 4 && comma == std::string::npos) {
                throw ConfigError(where() + ": expected 5 fields");
            }
            fields[f] = line.substr(start, f < 4 ? comma - start : std::string::npos);
            start = comma + 1;
        }
        if (fields[4].find(',') != std::string::npos) {
            throw ConfigError(where() + ": expected 5 fields");
        }
        ev.time_ms = parse_num<std::int64_t>(fields[0], where());
        ev.ue_id = parse_num<int>(fields[1], where());
        try {
            ev.kind = event_kind_from_string(fields[2]);
        } catch (const ConfigError&) {
            throw ConfigError(where() + ": unknown event kind '" + fields[2] + "'");
        }
        ev.source_cell = parse_num<int>(fields[3], where());
        ev.target_cell = parse_num<int>(fields[4], where());
        try {
            run.ledger.record(ev);
        } catch (const ConsistencyError& e) {
            throw ConfigError(where() + ": " + e.what());
        }
    }
    if (!header_seen) {
        throw ConfigError(path + ": missing '" + std::string(kHeader) + "' header");
    }
    if (run.meta.n_ue > 0 &&
        run.meta.outage_ms.size() != static_cast<std::size_t>(run.meta.n_ue)) {
        throw ConfigError(path + ": outage_ms has " +
                          std::to_string(run.meta.outage_ms.size()) + " entries for " +
                          std::to_string(run.meta.n_ue) + " UEs");
    }
    if (run.meta.n_cells > 0 &&
        run.meta.resv_ms.size() != static_cast<std::size_t>(run.meta.n_cells)) {
        throw ConfigError(path + ": resv_ms has " +
                          std::to_string(run.meta.resv_ms.size()) + " entries for " +
                          std::to_string(run.meta.n_cells) + " cells");
    }
    run.ledger.finalize();
    return run;
}

} // namespace chosim
