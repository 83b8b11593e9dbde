#include "chosim/link.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "chosim/errors.hpp"
#include "chosim/topology.hpp"

namespace chosim {

double noise_power_dbm(double bandwidth_mhz, double noise_figure_db) {
    if (bandwidth_mhz <= 0.0) throw DomainError("bandwidth must be positive");
    return -174.0 + 10.0 * std::log10(bandwidth_mhz * 1e6) + noise_figure_db;
}

namespace {

constexpr double kLn10Over10 = 0.23025850929940457;
inline double dbm_to_mw(double dbm) { return std::exp(dbm * kLn10Over10); }

// Largest k of n values in descending order, written to top[0..k). A linear
// insertion pass beats a heap or partial sort at these sizes (k <= n <= 12),
// and this runs once per interfering cell per supervision tick.
inline void top_k_desc(const double* v, int n, int k, double* top) {
    int filled = 0;
    for (int i = 0; i < n; ++i) {
        const double x = v[i];
        if (filled < k) {
            int j = filled++;
            while (j > 0 && top[j - 1] < x) {
                top[j] = top[j - 1];
                --j;
            }
            top[j] = x;
        } else if (x > top[k - 1]) {
            int j = k - 1;
            while (j > 0 && top[j - 1] < x) {
                top[j] = top[j - 1];
                --j;
            }
            top[j] = x;
        }
    }
}

} // namespace

double sinr_db(const RadioEnv& env, const SimConfig& cfg, const UeContext& ue,
               int cell, int beam_index, std::int64_t time_ms) {
    const Topology& topo = *env.topo;
    const int n_cells = topo.n_cells();
    if (cell < 0 || cell >= n_cells) throw DomainError("sinr: cell out of range");

    // The data panel is pointed at the cell of interest; interference is
    // seen through the same panel's pattern.
    const LocalDirection to_cell =
        direction_to(topo, topo.cells[static_cast<std::size_t>(cell)], ue.pos);
    const int panel = best_panel(ue.scheme, ue.heading_deg, to_cell.arrival_az_deg, cfg.ue);
    const double g_serv =
        panel_rx_gain(ue.scheme, ue.heading_deg, panel, to_cell.arrival_az_deg, cfg.ue);

    const double s_mw =
        dbm_to_mw(rx_power_dbm(env, cell, beam_index, ue.pos, g_serv, time_ms));

    const int k_b = std::min(cfg.link.scheduled_beams, kBeamsPerCell);
    double interference_mw = 0.0;
    thread_local std::vector<double> rx;
    double top[kBeamsPerCell];
    for (int c = 0; c < n_cells; ++c) {
        if (c == cell) continue;
        const Cell& interferer = topo.cells[static_cast<std::size_t>(c)];
        const LocalDirection dir = direction_to(topo, interferer, ue.pos);
        const double g =
            panel_rx_gain(ue.scheme, ue.heading_deg, panel, dir.arrival_az_deg, cfg.ue);
        beam_rx_powers(env, interferer, ue.pos, g, time_ms, rx);
        top_k_desc(rx.data(), static_cast<int>(rx.size()), k_b, top);
        double sum = 0.0;
        for (int b = 0; b < k_b; ++b) sum += dbm_to_mw(top[b]);
        interference_mw += sum / static_cast<double>(k_b);
    }

    const double n_mw = dbm_to_mw(noise_power_dbm(cfg.bandwidth_mhz, cfg.noise_figure_db));
    return 10.0 * std::log10(s_mw / (n_mw + interference_mw));
}

bool rlf_step(LinkState& st, double gamma_db, const SimConfig::LinkCfg& link,
              std::int64_t dt_ms) {
    if (gamma_db < link.gamma_out_db) {
        st.rlf_accum_ms += dt_ms;
        if (st.rlf_accum_ms >= link.t_rlf_ms) {
            st.rlf_accum_ms = 0;
            return true;
        }
    } else if (gamma_db > link.gamma_in_db) {
        st.rlf_accum_ms = 0;
    }
    // Between the two thresholds the accumulator holds its value.
    return false;
}

AccessOutcome access_step(LinkState& st, double gamma_target_db,
                          const SimConfig::LinkCfg& link, std::int64_t access_ms,
                          std::int64_t dt_ms) {
    st.access_elapsed_ms += dt_ms;
    if (gamma_target_db >= link.gamma_out_db) {
        st.access_good_ms += dt_ms;
        st.access_bad_run_ms = 0;
    } else {
        st.access_bad_run_ms += dt_ms;
    }
    if (st.access_bad_run_ms >= link.t_hof_ms) return AccessOutcome::Failure;
    if (st.access_good_ms >= access_ms) return AccessOutcome::Success;
    // A stalled access cannot drag on forever: twice the failure timer caps it.
    if (st.access_elapsed_ms >= 2 * link.t_hof_ms) return AccessOutcome::Failure;
    return AccessOutcome::InProgress;
}

} // namespace chosim
