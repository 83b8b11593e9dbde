#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "chosim/config.hpp"
#include "chosim/geometry.hpp"
#include "chosim/topology.hpp"

namespace chosim {

struct LinkSample {
    int cell_id = -1;
    int beam_index = 0;
    double rx_power_dbm = 0.0;
    std::int64_t time_ms = 0;
};

// Street-canyon LOS path loss. Distances below 1 m are clamped to keep the
// log finite.
double path_loss_db(double dist3d_m, double carrier_ghz);

// Correlated shadow fading, one independent field per cell. Each field is a
// coarse grid sampled from a sum of cosines whose wave vectors follow an
// isotropic bivariate Cauchy law, which makes the expected spatial
// autocorrelation exactly exp(-d / decorrelation distance). Queries
// interpolate the grid bilinearly, so the field is smooth and deterministic
// for a fixed (seed, cell, position).
class ShadowMap {
public:
    ShadowMap() = default;
    ShadowMap(const Topology& topo, double sigma_db, double decorr_m,
              double grid_pitch_m, int components, std::uint64_t seed);

    double at(int cell_id, Vec2 pos) const;

    double sigma_db() const { return sigma_db_; }
    std::uint64_t seed() const { return seed_; }

private:
    double sigma_db_ = 0.0;
    std::uint64_t seed_ = 0;
    double x0_ = 0.0, y0_ = 0.0, pitch_ = 1.0;
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<double>> fields_; // [cell][ix * ny + iy]
};

// Process-wide cache: sweeps revisit the same (seed, geometry, channel)
// combination for every mode and scheme, and the field is the expensive
// part of setup.
std::shared_ptr<const ShadowMap> shared_shadow_map(const Topology& topo,
                                                   const SimConfig& cfg);

// Optional Rayleigh fast fading per (cell, beam): a Jakes-style sum of
// oscillators with hashed angles and phases, so the value at any instant is
// stateless. Mean linear power is 1.
class FastFading {
public:
    FastFading() = default;
    FastFading(int oscillators, double doppler_hz, std::uint64_t seed);

    double gain_db(int cell_id, int beam_index, std::int64_t time_ms) const;

private:
    int m_ = 0;
    double doppler_hz_ = 0.0;
    std::uint64_t seed_ = 0;
};

// Everything rx_power needs, bundled so call sites stay short.
struct RadioEnv {
    const Topology* topo = nullptr;
    const ShadowMap* shadow = nullptr;
    const FastFading* fading = nullptr; // nullptr when fading is off
    double carrier_ghz = 28.0;
};

// Received power of one (cell, beam) link at a UE position:
// tx power + beam gain + panel gain - path loss - shadow + fast fade.
double rx_power_dbm(const RadioEnv& env, int cell_id, int beam_index,
                    Vec2 ue_pos, double ue_panel_gain_dbi, std::int64_t time_ms);

// All twelve beams of one cell at once; shares the direction and shadow
// lookups that rx_power_dbm would repeat per beam.
void beam_rx_powers(const RadioEnv& env, const Cell& cell, Vec2 ue_pos,
                    double ue_panel_gain_dbi, std::int64_t time_ms,
                    std::vector<double>& out);

} // namespace chosim
