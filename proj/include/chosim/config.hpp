#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace chosim {

enum class Mode { Cho, Fcho };
enum class Scheme { Iso, MpueA3, MpueA1 };

std::string to_string(Mode m);
std::string to_string(Scheme s);
Mode mode_from_string(const std::string& s);     // throws ConfigError
Scheme scheme_from_string(const std::string& s); // throws ConfigError

// Every tunable of a run. Field defaults are the reference parameter set;
// anything can be overridden from a JSON config file or dotted-key
// overrides on the command line.
struct SimConfig {
    double carrier_ghz = 28.0;
    double bandwidth_mhz = 100.0;
    double noise_figure_db = 9.0;

    struct TopologyCfg {
        int n_sites = 7; // 1 (center only) or 7 (hex ring)
        double inter_site_distance_m = 200.0;
        double tx_power_dbm = 40.0;
        double tx_height_m = 10.0;
        double rx_height_m = 1.5;
    } topology;

    struct ChannelCfg {
        double shadow_sigma_db = 4.0;
        double shadow_decorr_m = 25.0;
        double shadow_grid_pitch_m = 5.0;
        int shadow_components = 160;
        bool fading = false;
        int fading_oscillators = 16;
    } channel;

    struct UeCfg {
        int count = 420;
        double speed_kmh = 60.0;
        std::string scheme = "iso"; // iso | mpue-a3 | mpue-a1
        double panel_peak_gain_dbi = 5.0;
        double panel_floor_dbi = -10.0;
        double bounds_margin_m = 50.0;
    } ue;

    struct HandoverCfg {
        std::string mode = "cho"; // cho | fcho
        double o_prep_db = 10.0;
        double o_exec_db = 3.0;
        double o_rel_db = 13.0;
        double o_rep_db = 3.0;
        double o_hys_db = 3.0;
        std::int64_t window_ms = 80;        // T_prep = T_exec = T_rel = T_rep
        int max_prepared = 4;               // n_c^max
        std::int64_t prep_latency_ms = 40;  // report -> READY
        std::int64_t access_ms = 40;        // random-access duration
    } handover;

    struct LinkCfg {
        double gamma_out_db = -8.0;
        double gamma_in_db = -6.0;
        std::int64_t t_rlf_ms = 1000;
        std::int64_t t_hof_ms = 200;
        std::int64_t t_reest_ms = 200;
        int scheduled_beams = 4; // K_b
    } link;

    struct KpiCfg {
        std::int64_t t_fh_ms = 1000;
    } kpi;

    struct RunCfg {
        std::int64_t duration_ms = 60000;
        std::int64_t step_ms = 10;
        std::int64_t ssb_period_ms = 20;
        std::int64_t warmup_ms = 2000;
        std::uint64_t seed = 1;
        bool parallel = true; // OpenMP per-UE kernel vs serial reference
        int trace_ue_id = -1; // >= 0 writes a per-UE trace CSV
    } run;

    Mode mode() const { return mode_from_string(handover.mode); }
    Scheme scheme() const { return scheme_from_string(ue.scheme); }
    double speed_mps() const { return ue.speed_kmh / 3.6; }
    std::int64_t ssb_per_window() const {
        return handover.window_ms / run.ssb_period_ms;
    }

    // Throws ConfigError listing the first violated invariant.
    void validate() const;

    nlohmann::ordered_json to_json() const;
    static SimConfig from_json(const nlohmann::ordered_json& j); // throws ConfigError
    static SimConfig load_file(const std::string& path);         // throws ConfigError

    // Apply one dotted-key override, e.g. "handover.o_exec_db=3".
    // The key must resolve to an existing leaf. Throws ConfigError.
    void apply_override(const std::string& dotted_key, const std::string& value);

    // FNV-1a over the canonical JSON dump, as a 16-hex-digit string.
    std::string hash() const;
};

} // namespace chosim
