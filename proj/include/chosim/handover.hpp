#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "chosim/config.hpp"
#include "chosim/ledger.hpp"
#include "chosim/ue.hpp"

namespace chosim {

// The four measurement conditions. All inequalities are strict, so exact
// boundary equality never triggers.

// Prepare: serving has dropped to within o_prep of the target.
inline bool eval_prep(double p_serv, double p_tgt, double o_prep) {
    return p_serv < p_tgt + o_prep;
}

// Execute: target exceeds serving by more than o_exec.
inline bool eval_exec(double p_serv, double p_tgt, double o_exec) {
    return p_serv + o_exec < p_tgt;
}

// Release: a prepared cell fell more than o_rel below serving.
inline bool eval_rel(double p_serv, double p_prepared, double o_rel) {
    return p_prepared + o_rel < p_serv;
}

// Replace: only sensible when the set is full; a non-prepared neighbor
// exceeds the weakest prepared cell by more than o_rep.
inline bool eval_rep(double p_strong, double p_weakest, double o_rep, bool set_full) {
    return set_full && p_strong > p_weakest + o_rep;
}

// One monitoring-window step: consecutive satisfactions accumulate, any
// violation resets, reaching the window length fires and restarts.
inline bool window_step(int& hits, bool cond, int window) {
    hits = cond ? hits + 1 : 0;
    if (hits >= window) {
        hits = 0;
        return true;
    }
    return false;
}

struct PreparedEntry {
    int cell_id = -1;
    std::int64_t prepared_at_ms = 0;
    std::int64_t ready_at_ms = 0;
    bool ready = false;
};

// The UE's prepared-cell list, kept sorted by cell id. The serving cell
// must never be inserted; callers own that rule.
class PreparedSet {
public:
    explicit PreparedSet(int capacity = 4) : capacity_(capacity) {}

    int capacity() const { return capacity_; }
    int size() const { return static_cast<int>(entries_.size()); }
    bool full() const { return size() >= capacity_; }
    bool empty() const { return entries_.empty(); }
    bool contains(int cell) const;
    const PreparedEntry* find(int cell) const;
    const std::vector<PreparedEntry>& entries() const { return entries_; }

    // False when the cell is already present or the set is full.
    bool add_pending(int cell, std::int64_t now, std::int64_t ready_at);
    // Immediate READY insertion (the FCHO swap path).
    bool add_ready(int cell, std::int64_t now);
    bool remove(int cell);
    void clear() { entries_.clear(); }

    // Flip due PENDING entries to READY; returns their cells in ascending
    // id order for deterministic event emission.
    std::vector<int> promote(std::int64_t now);

    // Ascending cell ids of READY entries.
    std::vector<int> ready_cells() const;

    // Entry with the lowest L3, ties to the lower cell id; -1 when empty.
    int weakest(const UeContext& ue) const;

private:
    int capacity_ = 4;
    std::vector<PreparedEntry> entries_;
};

// Consecutive-hit counters for every monitored condition of one UE.
struct MonitorBank {
    std::vector<int> prep_hits; // per candidate cell
    std::vector<int> exec_hits; // per prepared cell
    std::vector<int> rel_hits;  // per prepared cell
    int rep_hits = 0;

    void init(int n_cells) {
        prep_hits.assign(static_cast<std::size_t>(n_cells), 0);
        exec_hits.assign(static_cast<std::size_t>(n_cells), 0);
        rel_hits.assign(static_cast<std::size_t>(n_cells), 0);
        rep_hits = 0;
    }
    void reset_all() {
        std::fill(prep_hits.begin(), prep_hits.end(), 0);
        std::fill(exec_hits.begin(), exec_hits.end(), 0);
        std::fill(rel_hits.begin(), rel_hits.end(), 0);
        rep_hits = 0;
    }
    void reset_cell(int cell) {
        prep_hits[static_cast<std::size_t>(cell)] = 0;
        exec_hits[static_cast<std::size_t>(cell)] = 0;
        rel_hits[static_cast<std::size_t>(cell)] = 0;
    }
};

// Per-UE handover state: the prepared set, the monitors, and what the UE
// is currently executing or recovering from.
struct HoState {
    PreparedSet prepared;
    MonitorBank monitors;
    int exec_target = -1;
    int exec_source = -1;
    std::int64_t reest_remaining_ms = 0;

    void init(int n_cells, int capacity) {
        prepared = PreparedSet(capacity);
        monitors.init(n_cells);
        exec_target = -1;
        exec_source = -1;
        reest_remaining_ms = 0;
    }
};

// Handover parameters pulled out of SimConfig once per run.
struct HoParams {
    double o_prep = 10.0;
    double o_exec = 3.0;
    double o_rel = 13.0;
    double o_rep = 3.0;
    int window = 4; // consecutive SSB instants
    std::int64_t prep_latency_ms = 40;
    std::int64_t access_ms = 40;
    int max_prepared = 4;
    Mode mode = Mode::Cho;

    static HoParams from(const SimConfig& cfg);
};

// One SSB-instant pass of the condition machinery for a CONNECTED UE:
// release -> replace -> READY promotion -> prepare -> execute. Emits
// signaling events and may put the UE into ACCESSING.
void ho_ssb_tick(UeContext& ue, HoState& ho, const HoParams& hp, std::int64_t t,
                 std::vector<SignalEvent>& out);

// Random access finished: switch serving, then release everything (CHO) or
// swap the old serving cell in for the executed target (FCHO).
void complete_handover(UeContext& ue, HoState& ho, const HoParams& hp,
                       std::int64_t t, std::vector<SignalEvent>& out);

// Random access failed: HOF, drop all preparations, start reestablishment.
void fail_handover(UeContext& ue, HoState& ho, std::int64_t t_reest_ms,
                   std::int64_t t, std::vector<SignalEvent>& out);

// Serving link lost while CONNECTED: RLF, drop all preparations, start
// reestablishment.
void declare_rlf(UeContext& ue, HoState& ho, std::int64_t t_reest_ms,
                 std::int64_t t, std::vector<SignalEvent>& out);

// Reestablishment timer expired: reconnect to the strongest cell by L3.
void complete_reestablishment(UeContext& ue, HoState& ho, std::int64_t t,
                              std::vector<SignalEvent>& out);

} // namespace chosim
