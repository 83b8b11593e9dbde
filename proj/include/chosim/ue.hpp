#pragma once

#include <cstdint>
#include <vector>

#include "chosim/channel.hpp"
#include "chosim/config.hpp"
#include "chosim/geometry.hpp"
#include "chosim/rng.hpp"
#include "chosim/topology.hpp"

namespace chosim {

enum class RrcState { Connected, Accessing, Reestablishing };

inline constexpr int kNumPanels = 3;
// Panel boresights relative to the UE heading.
inline constexpr double kPanelOffsetsDeg[kNumPanels] = {0.0, 120.0, -120.0};

// Measurement, filtering, and identity state of one UE. Handover and link
// supervision state live with their own modules; the engine owns both.
struct UeContext {
    int id = 0;
    Vec2 pos;
    double heading_deg = 0.0;
    double speed_mps = 0.0;
    Scheme scheme = Scheme::Iso;
    RrcState rrc = RrcState::Connected;
    int serving_cell = -1;
    int serving_beam = 1;
    int active_panel = 0; // MPUE-A1 round-robin position

    int n_cells = 0;

    // Two-sample moving average per (cell, beam): previous raw sample and
    // the current L1 output.
    std::vector<double> l1_prev_raw;
    std::vector<char> l1_has_prev;
    std::vector<double> l1;
    bool has_l1 = false; // first SSB instant seen

    // Cell-level L3 filter output and its initialization flags.
    std::vector<double> l3;
    std::vector<char> l3_init;

    // MPUE-A1 keeps the last reading taken through each panel; non-active
    // panels go stale until the round robin returns to them.
    std::vector<double> panel_raw; // [cell][beam][panel]
    std::vector<char> panel_has;

    std::vector<char> cells_touched; // per-call scratch for update_filters

    double l1_at(int cell, int beam_index) const {
        return l1[static_cast<std::size_t>(cell) * kBeamsPerCell + beam_index - 1];
    }
    double l3_at(int cell) const { return l3[static_cast<std::size_t>(cell)]; }
    bool l3_ready(int cell) const { return l3_init[static_cast<std::size_t>(cell)] != 0; }

    // Strongest beam of a cell by L1, for serving-beam selection.
    int best_beam(int cell) const;
    // Strongest cell by L3, for initial attach and reestablishment.
    int best_cell() const;
};

// Place a UE uniformly in the roaming area with a uniform heading.
UeContext make_ue(int id, const SimConfig& cfg, const Topology& topo, Rng& drop_rng);

// Advance straight by speed * dt; when the step would leave the bounds,
// redraw the heading uniformly among directions that stay inside.
void step_motion(UeContext& ue, std::int64_t dt_ms, const Hexagon& bounds, Rng& motion_rng);

// Receive gain of one panel toward an arrival azimuth: peak at the panel
// boresight, quadratic rolloff, floored. Isotropic UEs get 0 dBi.
double panel_rx_gain(Scheme scheme, double heading_deg, int panel,
                     double arrival_az_deg, const SimConfig::UeCfg& ue_cfg);

// Largest panel gain toward an arrival azimuth, and which panel gives it.
int best_panel(Scheme scheme, double heading_deg, double arrival_az_deg,
               const SimConfig::UeCfg& ue_cfg);

// One measurement pass over every (cell, beam) at an SSB instant. ISO takes
// the plain link power, MPUE-A3 the max across panels, MPUE-A1 the max
// across stored per-panel readings of which only the active panel's is
// fresh. Advances the A1 round robin. Throws SchedulingError off the SSB
// grid.
void measure(UeContext& ue, const RadioEnv& env, const SimConfig& cfg,
             std::int64_t time_ms, std::vector<LinkSample>& out);

// One step of the cell-level exponential filter, coefficient 1/2.
inline double l3_step(double prev, double q) { return 0.5 * prev + 0.5 * q; }

// Feed one instant's samples through the L1 moving average and the L3
// exponential filter (coefficient 1/2).
void update_filters(UeContext& ue, const std::vector<LinkSample>& samples);

} // namespace chosim
