#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace chosim {

// Declaration order doubles as the tie-break key when several events share
// a timestamp and UE, so the on-disk order mirrors cause before effect.
enum class EventKind {
    MeasReportPrep,
    ChoPrepare,
    ChoRelease,
    ChoReplace,
    FchoCfgRequest,
    FchoCfgModification,
    HoExecStart,
    HoSuccess,
    Hof,
    Rlf,
    Reestablish,
};

const char* to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s); // throws ConfigError

// Shortest round-trip decimal form of a double, for byte-stable files.
std::string format_compact(double v);

struct SignalEvent {
    std::int64_t time_ms = 0;
    int ue_id = -1;
    EventKind kind = EventKind::MeasReportPrep;
    // Semantics by kind: handover events carry (old serving, target).
    // FCHO_CFG_REQUEST carries (serving, newly prepared cell);
    // FCHO_CFG_MODIFICATION carries (newly prepared cell, modified cell) so
    // each modification names the preparation that caused it.
    int source_cell = -1;
    int target_cell = -1;
};

// Everything a report needs besides the events themselves; travels in the
// events.csv header so reports can be regenerated from the file alone.
struct RunMeta {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string mode = "cho";
    std::string scheme = "iso";
    double speed_kmh = 0.0;
    int n_ue = 0;
    int n_cells = 0;
    std::int64_t duration_ms = 0;
    std::int64_t warmup_ms = 0;
    std::int64_t t_fh_ms = 0;
    std::vector<std::int64_t> outage_ms; // per UE
    std::vector<std::int64_t> resv_ms;   // per cell: prepared-resource time
};

class EventLedger {
public:
    // Append one event. Enforces that a UE's stream never goes back in
    // time and that HO_SUCCESS matches the pending HO_EXEC_START target;
    // violations are internal errors that abort the run.
    void record(const SignalEvent& ev);

    // Sort by (time, ue_id, kind) and freeze.
    void finalize();
    bool finalized() const { return finalized_; }

    const std::vector<SignalEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }

private:
    std::vector<SignalEvent> events_;
    std::vector<std::int64_t> last_time_;  // per UE
    std::vector<int> pending_exec_target_; // per UE, -1 when idle
    bool finalized_ = false;
};

struct OverheadCounters {
    std::int64_t prepares = 0;
    std::int64_t releases = 0;
    std::int64_t replaces = 0;
    std::int64_t fcho_requests = 0;
    std::int64_t fcho_modifications = 0;
    double prepare_per_ue_min = 0.0;
    double release_per_ue_min = 0.0;
    double replace_per_ue_min = 0.0;
    double fcho_cfg_per_ue_min = 0.0;
    // prepare + release + replace; FCHO configuration messages are kept in
    // their own counter so both readings of "total" are available.
    double total_cho_events_per_ue_min = 0.0;
};

// Normalized signaling counters over events strictly after
// ignore_at_or_before_ms (the warm-up cut).
OverheadCounters count_overhead(const EventLedger& ledger, int n_ue,
                                double sim_minutes,
                                std::int64_t ignore_at_or_before_ms = 0);

void write_events_csv(const std::string& path, const EventLedger& ledger,
                      const RunMeta& meta);

struct ParsedRun {
    EventLedger ledger;
    RunMeta meta;
};

// Parse an events.csv produced by write_events_csv. Malformed content
// raises ConfigError naming the offending line.
ParsedRun read_events_csv(const std::string& path);

} // namespace chosim
