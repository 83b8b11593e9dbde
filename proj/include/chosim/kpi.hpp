#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "chosim/ledger.hpp"

namespace chosim {

enum class HoOutcome { Success, Failure };
enum class FastHoKind { None, PingPong, ShortStay };

// One concluded handover attempt, extracted from the event stream.
struct HoRecord {
    int ue_id = -1;
    std::int64_t time_ms = 0;
    int from_cell = -1;
    int to_cell = -1;
    HoOutcome outcome = HoOutcome::Success;
    FastHoKind fast = FastHoKind::None; // successes only
};

// Classify one consecutive pair of successful handovers of the same UE.
// The label attaches to the second handover: returning to the cell left
// within the window is a ping-pong, moving on to a third cell a short-stay.
inline FastHoKind classify_fast_handover(int first_from, std::int64_t first_time,
                                         int second_to, std::int64_t second_time,
                                         std::int64_t t_fh_ms) {
    if (second_time - first_time > t_fh_ms) return FastHoKind::None;
    return second_to == first_from ? FastHoKind::PingPong : FastHoKind::ShortStay;
}

inline double mobility_failure_pct(std::int64_t hofs, std::int64_t rlfs,
                                   std::int64_t successes) {
    const std::int64_t denom = successes + hofs + rlfs;
    if (denom <= 0) return 0.0;
    return 100.0 * static_cast<double>(hofs + rlfs) / static_cast<double>(denom);
}

// Share of UE-time spent in outage, as a percentage.
double outage_pct(const std::vector<std::int64_t>& outage_ms_per_ue,
                  std::int64_t counted_time_ms);

struct KpiReport {
    // Identity echo for sweep tables.
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string mode;
    std::string scheme;
    double speed_kmh = 0.0;
    int n_ue = 0;
    std::int64_t duration_ms = 0;
    std::int64_t warmup_ms = 0;

    // Handover outcome counts, post warm-up.
    std::int64_t ho_attempts = 0; // successes + hofs
    std::int64_t successes = 0;
    std::int64_t hofs = 0;
    std::int64_t rlfs = 0;
    double mobility_failure_pct = 0.0;
    std::int64_t ping_pongs = 0;
    std::int64_t short_stays = 0;
    double fast_handover_pct = 0.0;
    double outage_pct = 0.0;

    OverheadCounters overhead;

    // gNB-side prepared-resource occupancy, summed over cells.
    std::int64_t resv_ms_total = 0;
    double resv_s_mean_per_cell = 0.0;

    nlohmann::ordered_json to_json() const;
};

// Chronological successful/failed handovers of the run with fast-handover
// labels attached; includes pre-warm-up records (marked by their times) so
// classification chains that straddle the cut stay intact.
std::vector<HoRecord> extract_ho_records(const EventLedger& ledger,
                                         const RunMeta& meta);

// Assemble and validate the full report. The ledger must be finalized;
// internal inconsistencies raise ConsistencyError instead of emitting a
// wrong report.
KpiReport build_report(const EventLedger& ledger, const RunMeta& meta);

// One-row-per-run CSV for sweep aggregation.
std::string kpi_csv_header();
std::string kpi_csv_row(const KpiReport& r);

} // namespace chosim
