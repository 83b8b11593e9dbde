#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chosim/config.hpp"
#include "chosim/handover.hpp"
#include "chosim/kpi.hpp"
#include "chosim/ledger.hpp"
#include "chosim/link.hpp"

namespace chosim {

// Everything one run produces: the finalized signaling ledger, the run
// identity plus per-UE/per-cell accumulators, the KPI report computed from
// them, and (when run.trace_ue_id is set) per-SSB trace rows for one UE.
struct RunOutputs {
    EventLedger ledger;
    RunMeta meta;
    KpiReport report;
    std::vector<std::string> trace; // CSV lines, header first; empty unless traced
};

// Observation point for tests: invoked once after the initial drop (time 0)
// and then after every simulation tick, with the full per-UE state. Runs on
// the driving thread regardless of the parallel setting.
using TickHook = std::function<void(std::int64_t time_ms,
                                    const std::vector<UeContext>& ues,
                                    const std::vector<HoState>& hos,
                                    const std::vector<LinkState>& links)>;

// Simulate one configuration end to end. Deterministic for a given config:
// every random draw comes from a named substream of run.seed, UEs are
// processed in ascending id, and the parallel and serial paths produce
// identical output.
RunOutputs run_simulation(const SimConfig& cfg, const TickHook& hook = {});

// Cartesian sweep axes applied on top of a base configuration. Empty axes
// fall back to the base config's own value, so an all-empty sweep is a
// single run.
struct SweepAxes {
    std::vector<std::string> modes;
    std::vector<std::string> schemes;
    std::vector<double> speeds_kmh;
    std::vector<std::uint64_t> seeds;
};

// Called after each completed run so callers can persist partial results.
using RunSink = std::function<void(const KpiReport&)>;

// Run mode x scheme x speed x seed in deterministic order and collect the
// reports. A failing run propagates its exception after the sink has seen
// every completed run.
std::vector<KpiReport> sweep(const SimConfig& base, const SweepAxes& axes,
                             const RunSink& sink = {});

} // namespace chosim
