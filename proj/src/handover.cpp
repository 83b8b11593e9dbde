#include "chosim/handover.hpp"

#include <algorithm>

#include "chosim/errors.hpp"

namespace chosim {

bool PreparedSet::contains(int cell) const {
    return find(cell) != nullptr;
}

const PreparedEntry* PreparedSet::find(int cell) const {
    for (const auto& e : entries_) {
        if (e.cell_id == cell) return &e;
    }
    return nullptr;
}

bool PreparedSet::add_pending(int cell, std::int64_t now, std::int64_t ready_at) {
    if (full() || contains(cell)) return false;
    PreparedEntry e;
    e.cell_id = cell;
    e.prepared_at_ms = now;
    e.ready_at_ms = ready_at;
    e.ready = false;
    auto it = std::lower_bound(entries_.begin(), entries_.end(), cell,
                               [](const PreparedEntry& a, int c) { return a.cell_id < c; });
    entries_.insert(it, e);
    return true;
}

bool PreparedSet::add_ready(int cell, std::int64_t now) {
    if (!add_pending(cell, now, now)) return false;
    for (auto& e : entries_) {
        if (e.cell_id == cell) e.ready = true;
    }
    return true;
}

bool PreparedSet::remove(int cell) {
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (it->cell_id == cell) {
            entries_.erase(it);
            return true;
        }
    }
    return false;
}

std::vector<int> PreparedSet::promote(std::int64_t now) {
    std::vector<int> promoted;
    for (auto& e : entries_) { // entries_ is sorted by cell id
        if (!e.ready && e.ready_at_ms <= now) {
            e.ready = true;
            promoted.push_back(e.cell_id);
        }
    }
    return promoted;
}

std::vector<int> PreparedSet::ready_cells() const {
    std::vector<int> out;
    for (const auto& e : entries_) {
        if (e.ready) out.push_back(e.cell_id);
    }
    return out;
}

int PreparedSet::weakest(const UeContext& ue) const {
    int best = -1;
    double worst = 0.0;
    for (const auto& e : entries_) {
        double q = ue.l3_at(e.cell_id);
        if (best < 0 || q < worst) {
            best = e.cell_id;
            worst = q;
        }
    }
    return best;
}

HoParams HoParams::from(const SimConfig& cfg) {
    HoParams hp;
    hp.o_prep = cfg.handover.o_prep_db;
    hp.o_exec = cfg.handover.o_exec_db;
    hp.o_rel = cfg.handover.o_rel_db;
    hp.o_rep = cfg.handover.o_rep_db;
    hp.window = cfg.ssb_per_window();
    hp.prep_latency_ms = cfg.handover.prep_latency_ms;
    hp.access_ms = cfg.handover.access_ms;
    hp.max_prepared = cfg.handover.max_prepared;
    hp.mode = cfg.mode();
    return hp;
}

namespace {

void emit(std::vector<SignalEvent>& out, std::int64_t t, int ue, EventKind kind,
          int source, int target) {
    out.push_back(SignalEvent{t, ue, kind, source, target});
}

// Promote due PENDING entries. In FCHO mode every promotion is signaled:
// one configuration request toward the new cell (it covers transitions to
// every current set member), plus one modification of each cell that was
// READY before this instant so its earlier configuration learns about the
// new candidate. Cells promoted together are covered by each other's fresh
// requests and exchange no modifications. Modifications carry the newly
// readied cell as source so simultaneous promotions stay attributable.
void promote_due_entries(UeContext& ue, HoState& ho, const HoParams& hp,
                         std::int64_t t, std::vector<SignalEvent>& out) {
    const std::vector<int> ready_before = ho.prepared.ready_cells();
    for (int cell : ho.prepared.promote(t)) {
        if (hp.mode != Mode::Fcho) continue;
        emit(out, t, ue.id, EventKind::FchoCfgRequest, ue.serving_cell, cell);
        for (int other : ready_before) {
            emit(out, t, ue.id, EventKind::FchoCfgModification, cell, other);
        }
    }
}

} // namespace

void ho_ssb_tick(UeContext& ue, HoState& ho, const HoParams& hp, std::int64_t t,
                 std::vector<SignalEvent>& out) {
    if (ue.rrc != RrcState::Connected) {
        throw SchedulingError("handover conditions evaluated while not connected");
    }
    const double p_serv = ue.l3_at(ue.serving_cell);
    auto& mon = ho.monitors;

    // Release: READY entries whose quality collapsed below serving.
    {
        std::vector<int> fired;
        for (const auto& e : ho.prepared.entries()) {
            if (!e.ready) continue;
            bool cond = eval_rel(p_serv, ue.l3_at(e.cell_id), hp.o_rel);
            auto idx = static_cast<std::size_t>(e.cell_id);
            if (window_step(mon.rel_hits[idx], cond, hp.window)) {
                fired.push_back(e.cell_id);
            }
        }
        for (int cell : fired) {
            ho.prepared.remove(cell);
            mon.reset_cell(cell);
            emit(out, t, ue.id, EventKind::ChoRelease, ue.serving_cell, cell);
        }
    }

    // Replace: with a full set, a clearly stronger outsider displaces the
    // weakest member. A release this tick empties a slot and the replace
    // counter starts over.
    {
        bool cond = false;
        int weak = -1;
        int strong = -1;
        if (ho.prepared.full()) {
            weak = ho.prepared.weakest(ue);
            double best = 0.0;
            for (int c = 0; c < ue.n_cells; ++c) {
                if (c == ue.serving_cell || ho.prepared.contains(c)) continue;
                if (!ue.l3_ready(c)) continue;
                double q = ue.l3_at(c);
                if (strong < 0 || q > best) {
                    strong = c;
                    best = q;
                }
            }
            if (strong >= 0) {
                cond = eval_rep(best, ue.l3_at(weak), hp.o_rep, true);
            }
        }
        if (window_step(mon.rep_hits, cond, hp.window)) {
            ho.prepared.remove(weak);
            mon.reset_cell(weak);
            mon.reset_cell(strong);
            ho.prepared.add_pending(strong, t, t + hp.prep_latency_ms);
            emit(out, t, ue.id, EventKind::ChoReplace, weak, strong);
        }
    }

    // Entries prepared long enough ago become usable now, before new
    // preparations are considered.
    promote_due_entries(ue, ho, hp, t, out);

    // Prepare: candidates are unprepared neighbors, and only while a slot
    // is free; a full set zeroes every candidate window.
    for (int c = 0; c < ue.n_cells; ++c) {
        if (c == ue.serving_cell || ho.prepared.contains(c)) continue;
        if (!ue.l3_ready(c)) continue;
        bool cond = !ho.prepared.full() && eval_prep(p_serv, ue.l3_at(c), hp.o_prep);
        auto idx = static_cast<std::size_t>(c);
        if (window_step(mon.prep_hits[idx], cond, hp.window)) {
            emit(out, t, ue.id, EventKind::MeasReportPrep, ue.serving_cell, c);
            emit(out, t, ue.id, EventKind::ChoPrepare, ue.serving_cell, c);
            ho.prepared.add_pending(c, t, t + hp.prep_latency_ms);
            mon.reset_cell(c);
        }
    }

    // Execute: READY entries satisfying the execution condition for a full
    // window trigger a handover toward the strongest of them.
    {
        std::vector<int> fired;
        for (const auto& e : ho.prepared.entries()) {
            if (!e.ready) continue;
            bool cond = eval_exec(p_serv, ue.l3_at(e.cell_id), hp.o_exec);
            auto idx = static_cast<std::size_t>(e.cell_id);
            if (window_step(mon.exec_hits[idx], cond, hp.window)) {
                fired.push_back(e.cell_id);
            }
        }
        int target = -1;
        double best = 0.0;
        for (int cell : fired) {
            double q = ue.l3_at(cell);
            if (target < 0 || q > best) {
                target = cell;
                best = q;
            }
        }
        if (target >= 0) {
            ho.exec_source = ue.serving_cell;
            ho.exec_target = target;
            ue.rrc = RrcState::Accessing;
            emit(out, t, ue.id, EventKind::HoExecStart, ue.serving_cell, target);
        }
    }
}

void complete_handover(UeContext& ue, HoState& ho, const HoParams& hp,
                       std::int64_t t, std::vector<SignalEvent>& out) {
    if (ue.rrc != RrcState::Accessing || ho.exec_target < 0) {
        throw SchedulingError("handover completion without an execution in flight");
    }
    const int source = ho.exec_source;
    const int target = ho.exec_target;
    emit(out, t, ue.id, EventKind::HoSuccess, source, target);

    ue.serving_cell = target;
    ue.serving_beam = ue.best_beam(target);
    ue.rrc = RrcState::Connected;
    ho.exec_source = -1;
    ho.exec_target = -1;

    if (hp.mode == Mode::Fcho) {
        // Keep the rest of the set: the executed target leaves, the old
        // serving cell takes its slot and is immediately usable. No
        // signaling is recorded for this local swap.
        ho.prepared.remove(target);
        ho.prepared.add_ready(source, t);
    } else {
        // Plain CHO discards every preparation after the handover; this
        // implicit cleanup is not a release signal.
        ho.prepared.clear();
    }
    ho.monitors.reset_all();
}

namespace {

void enter_reestablishment(UeContext& ue, HoState& ho, std::int64_t t_reest_ms) {
    ue.rrc = RrcState::Reestablishing;
    ho.prepared.clear();
    ho.monitors.reset_all();
    ho.exec_source = -1;
    ho.exec_target = -1;
    ho.reest_remaining_ms = t_reest_ms;
}

} // namespace

void fail_handover(UeContext& ue, HoState& ho, std::int64_t t_reest_ms,
                   std::int64_t t, std::vector<SignalEvent>& out) {
    if (ue.rrc != RrcState::Accessing || ho.exec_target < 0) {
        throw SchedulingError("handover failure without an execution in flight");
    }
    emit(out, t, ue.id, EventKind::Hof, ho.exec_source, ho.exec_target);
    enter_reestablishment(ue, ho, t_reest_ms);
}

void declare_rlf(UeContext& ue, HoState& ho, std::int64_t t_reest_ms,
                 std::int64_t t, std::vector<SignalEvent>& out) {
    if (ue.rrc != RrcState::Connected) {
        throw SchedulingError("radio link failure declared while not connected");
    }
    emit(out, t, ue.id, EventKind::Rlf, ue.serving_cell, -1);
    enter_reestablishment(ue, ho, t_reest_ms);
}

void complete_reestablishment(UeContext& ue, HoState& ho, std::int64_t t,
                              std::vector<SignalEvent>& out) {
    if (ue.rrc != RrcState::Reestablishing) {
        throw SchedulingError("reestablishment completed while not reestablishing");
    }
    int target = ue.best_cell();
    if (target < 0) target = ue.serving_cell;
    emit(out, t, ue.id, EventKind::Reestablish, ue.serving_cell, target);
    ue.serving_cell = target;
    ue.serving_beam = ue.best_beam(target);
    ue.rrc = RrcState::Connected;
    ho.reest_remaining_ms = 0;
}

} // namespace chosim
