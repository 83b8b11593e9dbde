#include "chosim/topology.hpp"

#include <cmath>

#include "chosim/errors.hpp"

namespace chosim {

std::pair<double, double> beam_direction(int beam_index) {
    if (beam_index >= 1 && beam_index < kFirstInnerBeam) {
        // Eight outer beams on the horizon, 15 degrees apart, spanning
        // -52.5 .. +52.5 around the boresight.
        return {90.0, -52.5 + 15.0 * (beam_index - 1)};
    }
    if (beam_index >= kFirstInnerBeam && beam_index <= kBeamsPerCell) {
        // Four inner beams tilted 7 degrees down, 30 degrees apart.
        return {97.0, -45.0 + 30.0 * (beam_index - kFirstInnerBeam)};
    }
    throw DomainError("beam index out of range: " + std::to_string(beam_index));
}

Beam make_beam(int beam_index) {
    auto [theta, phi] = beam_direction(beam_index);
    Beam b;
    b.index = beam_index;
    b.elevation_deg = theta;
    b.azimuth_deg = phi;
    b.outer = beam_index < kFirstInnerBeam;
    b.peak_gain_dbi = b.outer ? kOuterPeakGainDbi : kInnerPeakGainDbi;
    b.beamwidth_az_deg = b.outer ? kOuterBwAzDeg : kInnerBwAzDeg;
    b.beamwidth_el_deg = b.outer ? kOuterBwElDeg : kInnerBwElDeg;
    return b;
}

double tx_gain_dbi(const Beam& beam, double zenith_deg, double azimuth_deg) {
    const double daz = wrap_deg(azimuth_deg - beam.azimuth_deg) / beam.beamwidth_az_deg;
    const double del = (zenith_deg - beam.elevation_deg) / beam.beamwidth_el_deg;
    const double atten = 12.0 * (daz * daz + del * del);
    return beam.peak_gain_dbi - std::min(atten, kSidelobeFloorDb);
}

Topology build_topology(const SimConfig& cfg) {
    const auto& top = cfg.topology;
    if (top.n_sites != 1 && top.n_sites != 7) {
        throw ConfigError("topology.n_sites must be 1 or 7");
    }
    if (top.inter_site_distance_m <= 0.0) {
        throw ConfigError("topology.inter_site_distance_m must be positive");
    }

    Topology topo;
    topo.inter_site_distance_m = top.inter_site_distance_m;
    topo.rx_height_m = top.rx_height_m;

    topo.sites.push_back({0.0, 0.0});
    if (top.n_sites == 7) {
        for (int k = 0; k < 6; ++k) {
            const double az = 60.0 * k;
            topo.sites.push_back(unit_from_azimuth(az) * top.inter_site_distance_m);
        }
    }

    int next_id = 0;
    for (int s = 0; s < static_cast<int>(topo.sites.size()); ++s) {
        for (int c = 0; c < kCellsPerSite; ++c) {
            Cell cell;
            cell.id = next_id++;
            cell.site_index = s;
            cell.boresight_deg = 30.0 + 120.0 * c;
            cell.tx_power_dbm = top.tx_power_dbm;
            cell.antenna_height_m = top.tx_height_m;
            cell.beams.reserve(kBeamsPerCell);
            for (int b = 1; b <= kBeamsPerCell; ++b) {
                cell.beams.push_back(make_beam(b));
            }
            topo.cells.push_back(std::move(cell));
        }
    }

    // UEs roam the deployment footprint: the hexagon through the outer
    // sites, grown by one cell radius and the configured margin.
    double radius = top.inter_site_distance_m / std::sqrt(3.0);
    if (top.n_sites == 7) {
        radius += top.inter_site_distance_m;
    }
    topo.bounds = Hexagon{radius + cfg.ue.bounds_margin_m};
    return topo;
}

LocalDirection direction_to(const Topology& topo, const Cell& cell, Vec2 ue_pos) {
    const Vec2 site = topo.sites.at(static_cast<std::size_t>(cell.site_index));
    const Vec2 d = ue_pos - site;
    const double d2 = std::max(d.norm(), 1e-6);
    const double dh = cell.antenna_height_m - topo.rx_height_m;

    LocalDirection out;
    out.dist3d_m = std::sqrt(d2 * d2 + dh * dh);
    const double global_az = azimuth_deg({0.0, 0.0}, d);
    out.azimuth_deg = wrap_deg(global_az - cell.boresight_deg);
    // Antenna above the UE: ray dips below the horizon, zenith > 90.
    out.zenith_deg = 90.0 + rad2deg(std::atan2(dh, d2));
    out.arrival_az_deg = wrap_deg(global_az + 180.0);
    return out;
}

nlohmann::ordered_json Topology::to_json() const {
    nlohmann::ordered_json j;
    j["inter_site_distance_m"] = inter_site_distance_m;
    j["rx_height_m"] = rx_height_m;
    j["bounds_circumradius_m"] = bounds.circumradius;
    j["sites"] = nlohmann::ordered_json::array();
    for (const auto& s : sites) {
        j["sites"].push_back({s.x, s.y});
    }
    j["cells"] = nlohmann::ordered_json::array();
    for (const auto& c : cells) {
        nlohmann::ordered_json jc;
        jc["id"] = c.id;
        jc["site"] = c.site_index;
        jc["boresight_deg"] = c.boresight_deg;
        jc["tx_power_dbm"] = c.tx_power_dbm;
        jc["antenna_height_m"] = c.antenna_height_m;
        nlohmann::ordered_json jb = nlohmann::ordered_json::array();
        for (const auto& b : c.beams) {
            jb.push_back({
                {"index", b.index},
                {"elevation_deg", b.elevation_deg},
                {"azimuth_deg", b.azimuth_deg},
                {"peak_gain_dbi", b.peak_gain_dbi},
                {"bw_az_deg", b.beamwidth_az_deg},
                {"bw_el_deg", b.beamwidth_el_deg},
            });
        }
        jc["beams"] = std::move(jb);
        j["cells"].push_back(std::move(jc));
    }
    return j;
}

} // namespace chosim
