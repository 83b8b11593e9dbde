#include "chosim/kpi.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "chosim/errors.hpp"

namespace chosim {

double outage_pct(const std::vector<std::int64_t>& outage_ms_per_ue,
                  std::int64_t counted_time_ms) {
    if (outage_ms_per_ue.empty() || counted_time_ms <= 0) return 0.0;
    long double total = 0.0L;
    for (std::int64_t o : outage_ms_per_ue) {
        if (o < 0 || o > counted_time_ms) {
            throw ConsistencyError("per-UE outage outside [0, counted time]");
        }
        total += static_cast<long double>(o);
    }
    const long double budget = static_cast<long double>(counted_time_ms) *
                               static_cast<long double>(outage_ms_per_ue.size());
    return static_cast<double>(100.0L * total / budget);
}

std::vector<HoRecord> extract_ho_records(const EventLedger& ledger,
                                         const RunMeta& meta) {
    if (!ledger.finalized()) {
        throw ConsistencyError("handover extraction needs a finalized ledger");
    }
    // Per-UE walk. The ledger is sorted by (time, ue, kind), so collecting
    // per UE preserves chronological order within each UE.
    std::map<int, std::vector<HoRecord>> per_ue;
    std::map<int, std::vector<std::int64_t>> reest_times;
    for (const SignalEvent& ev : ledger.events()) {
        switch (ev.kind) {
        case EventKind::HoSuccess: {
            HoRecord r;
            r.ue_id = ev.ue_id;
            r.time_ms = ev.time_ms;
            r.from_cell = ev.source_cell;
            r.to_cell = ev.target_cell;
            r.outcome = HoOutcome::Success;
            per_ue[ev.ue_id].push_back(r);
            break;
        }
        case EventKind::Hof: {
            HoRecord r;
            r.ue_id = ev.ue_id;
            r.time_ms = ev.time_ms;
            r.from_cell = ev.source_cell;
            r.to_cell = ev.target_cell;
            r.outcome = HoOutcome::Failure;
            per_ue[ev.ue_id].push_back(r);
            break;
        }
        case EventKind::Reestablish:
            reest_times[ev.ue_id].push_back(ev.time_ms);
            break;
        default:
            break;
        }
    }

    std::vector<HoRecord> out;
    for (auto& [ue, records] : per_ue) {
        const auto& reests = reest_times[ue];
        const HoRecord* prev_success = nullptr;
        for (HoRecord& r : records) {
            if (r.from_cell == r.to_cell) {
                throw ConsistencyError("handover with identical endpoints");
            }
            if (r.outcome == HoOutcome::Success) {
                bool chain_broken = false;
                if (prev_success != nullptr) {
                    // A reestablishment between two successes severs the
                    // fast-handover chain.
                    for (std::int64_t rt : reests) {
                        if (rt > prev_success->time_ms && rt <= r.time_ms) {
                            chain_broken = true;
                            break;
                        }
                    }
                    if (!chain_broken) {
                        r.fast = classify_fast_handover(
                            prev_success->from_cell, prev_success->time_ms,
                            r.to_cell, r.time_ms, meta.t_fh_ms);
                    }
                }
                prev_success = &r;
            }
        }
        out.insert(out.end(), records.begin(), records.end());
    }
    std::stable_sort(out.begin(), out.end(), [](const HoRecord& a, const HoRecord& b) {
        if (a.time_ms != b.time_ms) return a.time_ms < b.time_ms;
        return a.ue_id < b.ue_id;
    });
    return out;
}

KpiReport build_report(const EventLedger& ledger, const RunMeta& meta) {
    if (meta.n_ue <= 0) throw ConsistencyError("report needs n_ue > 0");
    const std::int64_t counted_ms = meta.duration_ms - meta.warmup_ms;
    if (counted_ms <= 0) throw ConsistencyError("no counted time after warm-up");

    KpiReport r;
    r.config_hash = meta.config_hash;
    r.seed = meta.seed;
    r.mode = meta.mode;
    r.scheme = meta.scheme;
    r.speed_kmh = meta.speed_kmh;
    r.n_ue = meta.n_ue;
    r.duration_ms = meta.duration_ms;
    r.warmup_ms = meta.warmup_ms;

    const auto records = extract_ho_records(ledger, meta);
    for (const HoRecord& rec : records) {
        if (rec.time_ms <= meta.warmup_ms) continue; // warm-up events do not count
        if (rec.outcome == HoOutcome::Success) {
            ++r.successes;
            if (rec.fast == FastHoKind::PingPong) ++r.ping_pongs;
            if (rec.fast == FastHoKind::ShortStay) ++r.short_stays;
        } else {
            ++r.hofs;
        }
    }
    for (const SignalEvent& ev : ledger.events()) {
        if (ev.kind == EventKind::Rlf && ev.time_ms > meta.warmup_ms) ++r.rlfs;
    }

    r.ho_attempts = r.successes + r.hofs;
    r.mobility_failure_pct = mobility_failure_pct(r.hofs, r.rlfs, r.successes);
    const std::int64_t denom = r.successes + r.hofs + r.rlfs;
    r.fast_handover_pct =
        denom > 0 ? 100.0 * static_cast<double>(r.ping_pongs + r.short_stays) /
                        static_cast<double>(denom)
                  : 0.0;

    if (static_cast<int>(meta.outage_ms.size()) != meta.n_ue) {
        throw ConsistencyError("outage vector does not match the UE count");
    }
    r.outage_pct = outage_pct(meta.outage_ms, counted_ms);

    const double minutes = static_cast<double>(counted_ms) / 60000.0;
    r.overhead = count_overhead(ledger, meta.n_ue, minutes, meta.warmup_ms);

    for (std::int64_t v : meta.resv_ms) {
        if (v < 0) throw ConsistencyError("negative prepared-resource time");
        r.resv_ms_total += v;
    }
    r.resv_s_mean_per_cell =
        meta.resv_ms.empty()
            ? 0.0
            : static_cast<double>(r.resv_ms_total) / 1000.0 /
                  static_cast<double>(meta.resv_ms.size());

    // Refuse to emit an internally inconsistent report.
    if (r.ping_pongs + r.short_stays > r.successes) {
        throw ConsistencyError("more fast handovers than successes");
    }
    for (double pct : {r.mobility_failure_pct, r.fast_handover_pct, r.outage_pct}) {
        if (pct < 0.0 || pct > 100.0) {
            throw ConsistencyError("percentage outside [0, 100]");
        }
    }
    return r;
}

nlohmann::ordered_json KpiReport::to_json() const {
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["mode"] = mode;
    j["scheme"] = scheme;
    j["speed_kmh"] = speed_kmh;
    j["n_ue"] = n_ue;
    j["duration_ms"] = duration_ms;
    j["warmup_ms"] = warmup_ms;
    j["ho_attempts"] = ho_attempts;
    j["successes"] = successes;
    j["hofs"] = hofs;
    j["rlfs"] = rlfs;
    j["mobility_failure_pct"] = mobility_failure_pct;
    j["ping_pongs"] = ping_pongs;
    j["short_stays"] = short_stays;
    j["fast_handover_pct"] = fast_handover_pct;
    j["outage_pct"] = outage_pct;
    j["overhead"] = {
        {"prepares", overhead.prepares},
        {"releases", overhead.releases},
        {"replaces", overhead.replaces},
        {"fcho_requests", overhead.fcho_requests},
        {"fcho_modifications", overhead.fcho_modifications},
        {"prepare_per_ue_min", overhead.prepare_per_ue_min},
        {"release_per_ue_min", overhead.release_per_ue_min},
        {"replace_per_ue_min", overhead.replace_per_ue_min},
        {"fcho_cfg_per_ue_min", overhead.fcho_cfg_per_ue_min},
        {"total_cho_events_per_ue_min", overhead.total_cho_events_per_ue_min},
    };
    j["resv_ms_total"] = resv_ms_total;
    j["resv_s_mean_per_cell"] = resv_s_mean_per_cell;
    return j;
}

std::string kpi_csv_header() {
    return "config_hash,seed,mode,scheme,speed_kmh,n_ue,duration_ms,warmup_ms,"
           "ho_attempts,successes,hofs,rlfs,mobility_failure_pct,ping_pongs,"
           "short_stays,fast_handover_pct,outage_pct,prepare_per_ue_min,"
           "release_per_ue_min,replace_per_ue_min,fcho_cfg_per_ue_min,"
           "total_cho_events_per_ue_min,resv_ms_total";
}

std::string kpi_csv_row(const KpiReport& r) {
    std::ostringstream out;
    out << r.config_hash << ',' << r.seed << ',' << r.mode << ',' << r.scheme << ','
        << format_compact(r.speed_kmh) << ',' << r.n_ue << ',' << r.duration_ms << ','
        << r.warmup_ms << ',' << r.ho_attempts << ',' << r.successes << ',' << r.hofs
        << ',' << r.rlfs << ',' << format_compact(r.mobility_failure_pct) << ','
        << r.ping_pongs << ',' << r.short_stays << ','
        << format_compact(r.fast_handover_pct) << ',' << format_compact(r.outage_pct)
        << ',' << format_compact(r.overhead.prepare_per_ue_min) << ','
        << format_compact(r.overhead.release_per_ue_min) << ','
        << format_compact(r.overhead.replace_per_ue_min) << ','
        << format_compact(r.overhead.fcho_cfg_per_ue_min) << ','
        << format_compact(r.overhead.total_cho_events_per_ue_min) << ','
        << r.resv_ms_total;
    return out.str();
}

} // namespace chosim
