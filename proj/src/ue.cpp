#include "chosim/ue.hpp"

#include <algorithm>
#include <cmath>

#include "chosim/errors.hpp"

namespace chosim {

int UeContext::best_beam(int cell) const {
    const std::size_t base = static_cast<std::size_t>(cell) * kBeamsPerCell;
    int best = 1;
    double best_val = l1[base];
    for (int b = 2; b <= kBeamsPerCell; ++b) {
        const double v = l1[base + b - 1];
        if (v > best_val) {
            best_val = v;
            best = b;
        }
    }
    return best;
}

int UeContext::best_cell() const {
    int best = -1;
    double best_val = 0.0;
    for (int c = 0; c < n_cells; ++c) {
        if (!l3_ready(c)) continue;
        if (best < 0 || l3_at(c) > best_val) {
            best_val = l3_at(c);
            best = c;
        }
    }
    return best;
}

UeContext make_ue(int id, const SimConfig& cfg, const Topology& topo, Rng& drop_rng) {
    UeContext ue;
    ue.id = id;
    ue.speed_mps = cfg.speed_mps();
    ue.scheme = cfg.scheme();
    ue.n_cells = topo.n_cells();

    const double r = topo.bounds.circumradius;
    do {
        ue.pos = {drop_rng.uniform(-r, r), drop_rng.uniform(-r, r)};
    } while (!topo.bounds.contains(ue.pos));
    ue.heading_deg = drop_rng.uniform(-180.0, 180.0);

    const auto links = static_cast<std::size_t>(ue.n_cells) * kBeamsPerCell;
    ue.l1_prev_raw.assign(links, 0.0);
    ue.l1_has_prev.assign(links, 0);
    ue.l1.assign(links, 0.0);
    ue.l3.assign(static_cast<std::size_t>(ue.n_cells), 0.0);
    ue.l3_init.assign(static_cast<std::size_t>(ue.n_cells), 0);
    if (ue.scheme == Scheme::MpueA1) {
        ue.panel_raw.assign(links * kNumPanels, 0.0);
        ue.panel_has.assign(links * kNumPanels, 0);
    }
    return ue;
}

void step_motion(UeContext& ue, std::int64_t dt_ms, const Hexagon& bounds, Rng& motion_rng) {
    const double dist = ue.speed_mps * static_cast<double>(dt_ms) * 1e-3;
    Vec2 next = ue.pos + unit_from_azimuth(ue.heading_deg) * dist;
    if (!bounds.contains(next)) {
        // Bounce: redraw until the step points back inside. Falls back to
        // aiming at the center if the corner is somehow too tight.
        for (int attempt = 0; attempt < 256; ++attempt) {
            ue.heading_deg = motion_rng.uniform(-180.0, 180.0);
            next = ue.pos + unit_from_azimuth(ue.heading_deg) * dist;
            if (bounds.contains(next)) break;
        }
        if (!bounds.contains(next)) {
            ue.heading_deg = azimuth_deg(ue.pos, {0.0, 0.0});
            next = ue.pos + unit_from_azimuth(ue.heading_deg) * dist;
        }
    }
    ue.pos = next;
}

double panel_rx_gain(Scheme scheme, double heading_deg, int panel,
                     double arrival_az_deg, const SimConfig::UeCfg& ue_cfg) {
    if (scheme == Scheme::Iso) return 0.0;
    const double boresight = heading_deg + kPanelOffsetsDeg[panel];
    const double delta = wrap_deg(arrival_az_deg - boresight);
    const double gain = ue_cfg.panel_peak_gain_dbi - 12.0 * (delta / 90.0) * (delta / 90.0);
    return std::max(gain, ue_cfg.panel_floor_dbi);
}

int best_panel(Scheme scheme, double heading_deg, double arrival_az_deg,
               const SimConfig::UeCfg& ue_cfg) {
    if (scheme == Scheme::Iso) return 0;
    int best = 0;
    double best_gain = panel_rx_gain(scheme, heading_deg, 0, arrival_az_deg, ue_cfg);
    for (int p = 1; p < kNumPanels; ++p) {
        const double g = panel_rx_gain(scheme, heading_deg, p, arrival_az_deg, ue_cfg);
        if (g > best_gain) {
            best_gain = g;
            best = p;
        }
    }
    return best;
}

void measure(UeContext& ue, const RadioEnv& env, const SimConfig& cfg,
             std::int64_t time_ms, std::vector<LinkSample>& out) {
    if (time_ms % cfg.run.ssb_period_ms != 0) {
        throw SchedulingError("measurement at t=" + std::to_string(time_ms) +
                              " ms is off the SSB grid");
    }
    out.clear();
    out.reserve(static_cast<std::size_t>(ue.n_cells) * kBeamsPerCell);

    thread_local std::vector<double> beams;
    for (const Cell& cell : env.topo->cells) {
        const LocalDirection dir = direction_to(*env.topo, cell, ue.pos);
        // Beam powers at 0 dBi; panel gain is a per-cell additive offset.
        beam_rx_powers(env, cell, ue.pos, 0.0, time_ms, beams);

        if (ue.scheme == Scheme::MpueA1) {
            const std::size_t cell_base =
                static_cast<std::size_t>(cell.id) * kBeamsPerCell;
            const double active_gain = panel_rx_gain(
                ue.scheme, ue.heading_deg, ue.active_panel, dir.arrival_az_deg, cfg.ue);
            for (int b = 0; b < kBeamsPerCell; ++b) {
                const std::size_t slot =
                    (cell_base + static_cast<std::size_t>(b)) * kNumPanels;
                ue.panel_raw[slot + static_cast<std::size_t>(ue.active_panel)] =
                    beams[static_cast<std::size_t>(b)] + active_gain;
                ue.panel_has[slot + static_cast<std::size_t>(ue.active_panel)] = 1;
                double sample = -1e30;
                for (int p = 0; p < kNumPanels; ++p) {
                    if (ue.panel_has[slot + static_cast<std::size_t>(p)]) {
                        sample = std::max(sample,
                                          ue.panel_raw[slot + static_cast<std::size_t>(p)]);
                    }
                }
                out.push_back({cell.id, b + 1, sample, time_ms});
            }
        } else {
            double gain = 0.0;
            if (ue.scheme == Scheme::MpueA3) {
                const int p = best_panel(ue.scheme, ue.heading_deg,
                                         dir.arrival_az_deg, cfg.ue);
                gain = panel_rx_gain(ue.scheme, ue.heading_deg, p,
                                     dir.arrival_az_deg, cfg.ue);
            }
            for (int b = 0; b < kBeamsPerCell; ++b) {
                out.push_back({cell.id, b + 1,
                               beams[static_cast<std::size_t>(b)] + gain, time_ms});
            }
        }
    }

    if (ue.scheme == Scheme::MpueA1) {
        ue.active_panel = (ue.active_panel + 1) % kNumPanels;
    }
}

void update_filters(UeContext& ue, const std::vector<LinkSample>& samples) {
    ue.cells_touched.assign(static_cast<std::size_t>(ue.n_cells), 0);
    for (const LinkSample& s : samples) {
        const std::size_t idx =
            static_cast<std::size_t>(s.cell_id) * kBeamsPerCell + s.beam_index - 1;
        const double raw = s.rx_power_dbm;
        ue.l1[idx] = ue.l1_has_prev[idx] ? 0.5 * (ue.l1_prev_raw[idx] + raw) : raw;
        ue.l1_prev_raw[idx] = raw;
        ue.l1_has_prev[idx] = 1;
        ue.cells_touched[static_cast<std::size_t>(s.cell_id)] = 1;
    }
    ue.has_l1 = true;

    for (int c = 0; c < ue.n_cells; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        if (!ue.cells_touched[ci]) continue;
        const std::size_t base = ci * kBeamsPerCell;
        double q = ue.l1[base];
        for (int b = 1; b < kBeamsPerCell; ++b) {
            q = std::max(q, ue.l1[base + static_cast<std::size_t>(b)]);
        }
        ue.l3[ci] = ue.l3_init[ci] ? l3_step(ue.l3[ci], q) : q;
        ue.l3_init[ci] = 1;
    }
}

} // namespace chosim
