#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "chosim/config.hpp"
#include "chosim/geometry.hpp"

namespace chosim {

// Grid-of-beams constants. Outer beams (1..8) come from the larger panel
// and trade beamwidth for gain; inner beams (9..12) cover the near region.
inline constexpr int kBeamsPerCell = 12;
inline constexpr int kFirstInnerBeam = 9;
inline constexpr double kOuterPeakGainDbi = 29.0;
inline constexpr double kInnerPeakGainDbi = 23.0;
inline constexpr double kOuterBwAzDeg = 6.4;
inline constexpr double kOuterBwElDeg = 9.2;
inline constexpr double kInnerBwAzDeg = 12.8;
inline constexpr double kInnerBwElDeg = 18.4;
inline constexpr double kSidelobeFloorDb = 25.0; // below peak
inline constexpr int kCellsPerSite = 3;

struct Beam {
    int index = 0;               // 1..12
    double elevation_deg = 0.0;  // zenith angle of the boresight
    double azimuth_deg = 0.0;    // relative to the cell boresight
    bool outer = false;
    double peak_gain_dbi = 0.0;
    double beamwidth_az_deg = 0.0;
    double beamwidth_el_deg = 0.0;
};

struct Cell {
    int id = 0;
    int site_index = 0;
    double boresight_deg = 0.0; // absolute azimuth
    double tx_power_dbm = 0.0;
    double antenna_height_m = 0.0;
    std::vector<Beam> beams;
};

struct Topology {
    std::vector<Vec2> sites;
    std::vector<Cell> cells;
    double inter_site_distance_m = 0.0;
    double rx_height_m = 1.5;
    Hexagon bounds; // simulation area: deployment hexagon plus margin

    int n_cells() const { return static_cast<int>(cells.size()); }

    nlohmann::ordered_json to_json() const;
};

// Direction from a cell's antenna to a point, in the cell's local frame,
// plus the quantities every link computation needs.
struct LocalDirection {
    double zenith_deg = 0.0;     // 90 = horizon, >90 below
    double azimuth_deg = 0.0;    // relative to cell boresight, wrapped
    double dist3d_m = 0.0;
    double arrival_az_deg = 0.0; // global azimuth UE -> site (Rx side)
};

// Throws ConfigError on invalid site count or ISD.
Topology build_topology(const SimConfig& cfg);

// Table beam angles: (zenith, azimuth) for beam index 1..12.
// Throws DomainError for indices outside 1..12.
std::pair<double, double> beam_direction(int beam_index);

Beam make_beam(int beam_index);

// Beamforming gain toward a direction in the cell's local frame:
// Gaussian main lobe, floored kSidelobeFloorDb below the peak.
double tx_gain_dbi(const Beam& beam, double zenith_deg, double azimuth_deg);

LocalDirection direction_to(const Topology& topo, const Cell& cell, Vec2 ue_pos);

} // namespace chosim
