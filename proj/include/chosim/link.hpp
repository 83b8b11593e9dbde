#pragma once

#include <cstdint>

#include "chosim/channel.hpp"
#include "chosim/config.hpp"
#include "chosim/ue.hpp"

namespace chosim {

// Thermal noise floor over the system bandwidth plus the receiver noise
// figure: -174 dBm/Hz + 10 log10(BW) + NF.
double noise_power_dbm(double bandwidth_mhz, double noise_figure_db);

// Downlink SINR of `cell`'s beam `beam_index` at the UE, in dB. The UE
// receives through its best panel toward that cell (0 dBi when isotropic);
// every other cell interferes at full load with the mean linear power of
// its K_b strongest beams, seen through that same data panel.
double sinr_db(const RadioEnv& env, const SimConfig& cfg, const UeContext& ue,
               int cell, int beam_index, std::int64_t time_ms);

// Link-supervision accumulators of one UE.
struct LinkState {
    std::int64_t rlf_accum_ms = 0;    // time spent below gamma_out
    std::int64_t outage_ms = 0;       // counted by the engine after warmup
    std::int64_t access_elapsed_ms = 0;
    std::int64_t access_good_ms = 0;
    std::int64_t access_bad_run_ms = 0;
};

inline void begin_access(LinkState& st) {
    st.access_elapsed_ms = 0;
    st.access_good_ms = 0;
    st.access_bad_run_ms = 0;
}

inline void reset_rlf(LinkState& st) { st.rlf_accum_ms = 0; }

// One supervision step while CONNECTED. Time below gamma_out accumulates,
// time above gamma_in clears the accumulator, the hysteresis band between
// them holds it. Returns true when the accumulator reaches t_rlf_ms: the
// caller declares a radio link failure.
bool rlf_step(LinkState& st, double gamma_db, const SimConfig::LinkCfg& link,
              std::int64_t dt_ms);

enum class AccessOutcome { InProgress, Success, Failure };

// One random-access step while ACCESSING, driven by the target-cell SINR.
// Instants at or above gamma_out advance the access procedure, which
// completes after access_ms of accumulated progress. A contiguous spell
// below gamma_out of t_hof_ms declares handover failure, as does a total
// access time of 2*t_hof_ms without completion.
AccessOutcome access_step(LinkState& st, double gamma_target_db,
                          const SimConfig::LinkCfg& link, std::int64_t access_ms,
                          std::int64_t dt_ms);

// A UE is in outage while performing random access, while reestablishing,
// or while its serving SINR sits below gamma_out.
inline bool in_outage(RrcState rrc, double gamma_db, double gamma_out_db) {
    if (rrc != RrcState::Connected) return true;
    return gamma_db < gamma_out_db;
}

} // namespace chosim
