#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chosim/engine.hpp"
#include "chosim/errors.hpp"

using namespace chosim;

namespace {

SimConfig desk_cfg(const std::string& mode, const std::string& scheme,
                   double speed_kmh, std::uint64_t seed) {
    SimConfig cfg;
    cfg.handover.mode = mode;
    cfg.ue.scheme = scheme;
    cfg.ue.speed_kmh = speed_kmh;
    cfg.ue.count = 12;
    cfg.run.duration_ms = 20000;
    cfg.run.warmup_ms = 2000;
    cfg.run.seed = seed;
    cfg.channel.fading = false;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

long count_kind(const EventLedger& led, EventKind k) {
    long n = 0;
    for (const auto& ev : led.events())
        if (ev.kind == k) ++n;
    return n;
}

} // namespace

TEST_CASE("run completes and the report is arithmetically consistent") {
    for (const std::string mode : {"cho", "fcho"}) {
        const SimConfig cfg = desk_cfg(mode, "iso", 90.0, 7);
        const RunOutputs out = run_simulation(cfg);

        CHECK(out.ledger.finalized());
        CHECK(out.report.ho_attempts ==
              out.report.successes + out.report.hofs);

        // The mean UE crosses several cell borders in 18 counted seconds at
        // 90 km/h over a 200 m grid, so a silent run means a broken engine.
        CHECK(out.report.successes > 0);

        // Per-UE outage can never exceed the counted window.
        const std::int64_t counted = cfg.run.duration_ms - cfg.run.warmup_ms;
        for (std::int64_t o : out.meta.outage_ms) {
            CHECK(o >= 0);
            CHECK(o <= counted);
        }

        // Preparation signaling exists in both modes; config events only in
        // the fast variant.
        CHECK(count_kind(out.ledger, EventKind::ChoPrepare) > 0);
        if (mode == "cho") {
            CHECK(count_kind(out.ledger, EventKind::FchoCfgRequest) == 0);
            CHECK(count_kind(out.ledger, EventKind::FchoCfgModification) == 0);
        } else {
            CHECK(count_kind(out.ledger, EventKind::FchoCfgRequest) > 0);
        }

        // Reserving a prepared cell for 40 ms before readiness alone makes
        // this positive whenever anything was prepared after warmup.
        std::int64_t resv_total = 0;
        for (std::int64_t r : out.meta.resv_ms) resv_total += r;
        CHECK(resv_total > 0);
    }
}

TEST_CASE("every failure is followed by exactly one reestablishment") {
    // A hostile link budget guarantees radio link failures and handover
    // failures, so the failure/recovery pairing is actually exercised.
    bool saw_failure = false;
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
        SimConfig cfg = desk_cfg("cho", "iso", 120.0, seed);
        cfg.run.duration_ms = 30000;
        cfg.link.gamma_out_db = 5.0;
        cfg.link.gamma_in_db = 7.0;
        const RunOutputs out = run_simulation(cfg);
        saw_failure = saw_failure || out.report.hofs + out.report.rlfs > 0;

        std::map<int, std::vector<const SignalEvent*>> per_ue;
        for (const auto& ev : out.ledger.events())
            per_ue[ev.ue_id].push_back(&ev);

        for (const auto& [ue, evs] : per_ue) {
            (void)ue;
            bool pending_reest = false;
            std::int64_t failed_at = -1;
            for (const SignalEvent* ev : evs) {
                if (ev->kind == EventKind::Hof || ev->kind == EventKind::Rlf) {
                    CHECK(!pending_reest);
                    pending_reest = true;
                    failed_at = ev->time_ms;
                } else if (ev->kind == EventKind::Reestablish) {
                    CHECK(pending_reest);
                    CHECK(ev->time_ms == failed_at + cfg.link.t_reest_ms);
                    pending_reest = false;
                } else if (pending_reest) {
                    // Nothing else may be signaled while the UE is down.
                    CHECK(ev->kind == EventKind::Hof);
                }
            }
            // A failure inside the last recovery interval of the run may
            // legitimately still be unresolved when the clock stops.
            if (pending_reest)
                CHECK(failed_at + cfg.link.t_reest_ms > cfg.run.duration_ms);
        }
    }
    CHECK(saw_failure);
}

TEST_CASE("per-tick state invariants hold for a whole run") {
    for (const std::string mode : {"cho", "fcho"}) {
        SimConfig cfg = desk_cfg(mode, "iso", 120.0, 3);
        cfg.run.duration_ms = 15000;

        long ticks = 0;
        const TickHook hook = [&](std::int64_t t, const std::vector<UeContext>& ues,
                                  const std::vector<HoState>& hos,
                                  const std::vector<LinkState>& links) {
            ++ticks;
            for (std::size_t i = 0; i < ues.size(); ++i) {
                const UeContext& ue = ues[i];
                const HoState& ho = hos[i];
                const auto& entries = ho.prepared.entries();

                REQUIRE(entries.size() <=
                        static_cast<std::size_t>(cfg.handover.max_prepared));
                for (std::size_t k = 0; k < entries.size(); ++k) {
                    REQUIRE(entries[k].cell_id != ue.serving_cell);
                    if (k > 0) REQUIRE(entries[k - 1].cell_id < entries[k].cell_id);
                    if (entries[k].ready) REQUIRE(entries[k].ready_at_ms <= t);
                    REQUIRE(entries[k].prepared_at_ms <= entries[k].ready_at_ms);
                }
                if (ue.rrc == RrcState::Accessing) {
                    REQUIRE(ho.exec_target >= 0);
                    REQUIRE(ho.exec_target != ue.serving_cell);
                }
                if (ue.rrc == RrcState::Reestablishing) {
                    REQUIRE(entries.empty());
                    REQUIRE(ho.reest_remaining_ms > 0);
                }
                REQUIRE(links[i].outage_ms >= 0);
            }
        };

        run_simulation(cfg, hook);
        CHECK(ticks == 1501); // initial drop plus one per tick
    }
}

TEST_CASE("identical configs give byte-identical outputs") {
    const SimConfig cfg = desk_cfg("fcho", "mpue-a3", 60.0, 11);
    const RunOutputs a = run_simulation(cfg);
    const RunOutputs b = run_simulation(cfg);

    write_events_csv("tmp_engine_a.csv", a.ledger, a.meta);
    write_events_csv("tmp_engine_b.csv", b.ledger, b.meta);
    CHECK(slurp("tmp_engine_a.csv") == slurp("tmp_engine_b.csv"));
    CHECK(a.report.to_json().dump(2) == b.report.to_json().dump(2));
    std::remove("tmp_engine_a.csv");
    std::remove("tmp_engine_b.csv");
}

TEST_CASE("parallel and serial paths produce identical results") {
    SimConfig cfg = desk_cfg("cho", "mpue-a3", 90.0, 5);
    cfg.run.parallel = true;
    const RunOutputs par = run_simulation(cfg);
    cfg.run.parallel = false;
    const RunOutputs ser = run_simulation(cfg);

    REQUIRE(par.ledger.size() == ser.ledger.size());
    for (std::size_t i = 0; i < par.ledger.size(); ++i) {
        const SignalEvent& x = par.ledger.events()[i];
        const SignalEvent& y = ser.ledger.events()[i];
        CHECK(x.time_ms == y.time_ms);
        CHECK(x.ue_id == y.ue_id);
        CHECK(x.kind == y.kind);
        CHECK(x.source_cell == y.source_cell);
        CHECK(x.target_cell == y.target_cell);
    }
    CHECK(par.meta.outage_ms == ser.meta.outage_ms);
    CHECK(par.meta.resv_ms == ser.meta.resv_ms);
}

TEST_CASE("different seeds give different runs") {
    const RunOutputs a = run_simulation(desk_cfg("cho", "iso", 60.0, 1));
    const RunOutputs b = run_simulation(desk_cfg("cho", "iso", 60.0, 2));
    bool differs = a.ledger.size() != b.ledger.size();
    if (!differs) {
        for (std::size_t i = 0; i < a.ledger.size() && !differs; ++i)
            differs = a.ledger.events()[i].time_ms != b.ledger.events()[i].time_ms ||
                      a.ledger.events()[i].ue_id != b.ledger.events()[i].ue_id;
    }
    CHECK(differs);
}

TEST_CASE("event stream respects causality per UE") {
    SimConfig cfg = desk_cfg("cho", "iso", 120.0, 9);
    cfg.run.duration_ms = 30000;
    const RunOutputs out = run_simulation(cfg);

    std::map<int, std::vector<const SignalEvent*>> per_ue;
    for (const auto& ev : out.ledger.events()) {
        CHECK(ev.time_ms > 0);
        CHECK(ev.time_ms <= cfg.run.duration_ms);
        per_ue[ev.ue_id].push_back(&ev);
    }

    for (const auto& [ue, evs] : per_ue) {
        (void)ue;
        std::int64_t exec_time = -1;
        int exec_target = -1;
        for (const SignalEvent* ev : evs) {
            switch (ev->kind) {
            case EventKind::HoExecStart:
                CHECK(exec_time < 0);
                exec_time = ev->time_ms;
                exec_target = ev->target_cell;
                break;
            case EventKind::HoSuccess:
                REQUIRE(exec_time >= 0);
                // Success needs access_ms of good link, counted from the
                // first tick after execution.
                CHECK(ev->time_ms >= exec_time + 40);
                CHECK(ev->target_cell == exec_target);
                exec_time = -1;
                break;
            case EventKind::Hof:
                REQUIRE(exec_time >= 0);
                CHECK(ev->time_ms >= exec_time + 200);
                CHECK(ev->time_ms <= exec_time + 400);
                exec_time = -1;
                break;
            case EventKind::Reestablish:
                CHECK(exec_time < 0);
                break;
            default:
                break;
            }
        }
    }
}

TEST_CASE("warmup events are excluded from counted KPIs") {
    SimConfig cfg = desk_cfg("cho", "iso", 120.0, 13);
    cfg.run.warmup_ms = 6000;
    const RunOutputs out = run_simulation(cfg);

    long successes_after = 0;
    for (const auto& ev : out.ledger.events())
        if (ev.kind == EventKind::HoSuccess && ev.time_ms > cfg.run.warmup_ms)
            ++successes_after;
    CHECK(out.report.successes == successes_after);
}

TEST_CASE("trace output covers every measurement instant of the chosen UE") {
    SimConfig cfg = desk_cfg("cho", "iso", 60.0, 4);
    cfg.run.duration_ms = 2000;
    cfg.run.warmup_ms = 0;
    cfg.run.trace_ue_id = 3;
    const RunOutputs out = run_simulation(cfg);

    // Header, the drop row at time zero, then one row per SSB instant.
    REQUIRE(out.trace.size() == 2 + 100);
    CHECK(out.trace[0].rfind("time_ms,", 0) == 0);
    CHECK(out.trace[1].rfind("0,", 0) == 0);
    CHECK(out.trace.back().rfind("2000,", 0) == 0);
    for (std::size_t i = 1; i < out.trace.size(); ++i) {
        const std::string& row = out.trace[i];
        CHECK(std::count(row.begin(), row.end(), ',') == 13);
    }

    cfg.run.trace_ue_id = -1;
    CHECK(run_simulation(cfg).trace.empty());
}

TEST_CASE("invalid configuration is rejected before simulation") {
    SimConfig cfg = desk_cfg("cho", "iso", 60.0, 1);
    cfg.run.step_ms = 7; // does not divide the measurement period
    CHECK_THROWS_AS(run_simulation(cfg), ConfigError);
}
