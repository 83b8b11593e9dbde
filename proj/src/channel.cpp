#include "chosim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "chosim/errors.hpp"
#include "chosim/rng.hpp"

namespace chosim {

double path_loss_db(double dist3d_m, double carrier_ghz) {
    const double d = std::max(dist3d_m, 1.0);
    return 32.4 + 21.0 * std::log10(d) + 20.0 * std::log10(carrier_ghz);
}

ShadowMap::ShadowMap(const Topology& topo, double sigma_db, double decorr_m,
                     double grid_pitch_m, int components, std::uint64_t seed)
    : sigma_db_(sigma_db), seed_(seed), pitch_(grid_pitch_m) {
    if (decorr_m <= 0.0 || grid_pitch_m <= 0.0 || components < 1) {
        throw DomainError("shadow map needs positive decorrelation, pitch, components");
    }
    // One pitch of margin so bilinear lookups stay inside the grid even at
    // the exact edge of the roaming area.
    const double half = topo.bounds.circumradius + grid_pitch_m;
    x0_ = -half;
    y0_ = -half;
    nx_ = static_cast<int>(std::ceil(2.0 * half / pitch_)) + 2;
    ny_ = nx_;

    const double amp = sigma_db * std::sqrt(2.0 / components);
    fields_.resize(topo.cells.size());
    std::vector<double> cos_a(static_cast<std::size_t>(nx_));
    std::vector<double> sin_a(static_cast<std::size_t>(nx_));
    std::vector<double> cos_b(static_cast<std::size_t>(ny_));
    std::vector<double> sin_b(static_cast<std::size_t>(ny_));

    for (std::size_t c = 0; c < topo.cells.size(); ++c) {
        auto& grid = fields_[c];
        grid.assign(static_cast<std::size_t>(nx_) * ny_, 0.0);
        Rng rng = make_substream(seed, "shadow", c);
        for (int k = 0; k < components; ++k) {
            // Radial inverse-CDF draw from the isotropic bivariate Cauchy
            // law scaled by 1/decorr_m: F(r) = 1 - (1 + r^2)^(-1/2).
            double u = rng.uniform01();
            u = std::min(u, 1.0 - 1e-12);
            const double radius = std::sqrt(1.0 / ((1.0 - u) * (1.0 - u)) - 1.0) / decorr_m;
            const double dir = rng.uniform(0.0, 2.0 * kPi);
            const double phase = rng.uniform(0.0, 2.0 * kPi);
            const double kx = radius * std::cos(dir);
            const double ky = radius * std::sin(dir);

            // cos(base + i*dx + j*dy) expanded with the angle-sum identity
            // keeps the inner loop free of trig calls.
            const double dx = kx * pitch_;
            const double dy = ky * pitch_;
            const double base = kx * x0_ + ky * y0_ + phase;
            for (int i = 0; i < nx_; ++i) {
                cos_a[i] = std::cos(base + dx * i);
                sin_a[i] = std::sin(base + dx * i);
            }
            for (int j = 0; j < ny_; ++j) {
                cos_b[j] = std::cos(dy * j);
                sin_b[j] = std::sin(dy * j);
            }
            for (int i = 0; i < nx_; ++i) {
                double* row = grid.data() + static_cast<std::size_t>(i) * ny_;
                const double ca = cos_a[i], sa = sin_a[i];
                for (int j = 0; j < ny_; ++j) {
                    row[j] += amp * (ca * cos_b[j] - sa * sin_b[j]);
                }
            }
        }
    }
}

double ShadowMap::at(int cell_id, Vec2 pos) const {
    const auto& grid = fields_.at(static_cast<std::size_t>(cell_id));
    double gx = (pos.x - x0_) / pitch_;
    double gy = (pos.y - y0_) / pitch_;
    gx = std::clamp(gx, 0.0, static_cast<double>(nx_ - 1) - 1e-9);
    gy = std::clamp(gy, 0.0, static_cast<double>(ny_ - 1) - 1e-9);
    const int i = static_cast<int>(gx);
    const int j = static_cast<int>(gy);
    const double fx = gx - i;
    const double fy = gy - j;
    const double v00 = grid[static_cast<std::size_t>(i) * ny_ + j];
    const double v01 = grid[static_cast<std::size_t>(i) * ny_ + j + 1];
    const double v10 = grid[static_cast<std::size_t>(i + 1) * ny_ + j];
    const double v11 = grid[static_cast<std::size_t>(i + 1) * ny_ + j + 1];
    return (1.0 - fx) * ((1.0 - fy) * v00 + fy * v01) +
           fx * ((1.0 - fy) * v10 + fy * v11);
}

std::shared_ptr<const ShadowMap> shared_shadow_map(const Topology& topo,
                                                   const SimConfig& cfg) {
    static std::mutex mtx;
    static std::map<std::string, std::shared_ptr<const ShadowMap>> cache;

    std::ostringstream key;
    key << cfg.run.seed << '|' << cfg.topology.n_sites << '|'
        << cfg.topology.inter_site_distance_m << '|' << topo.bounds.circumradius
        << '|' << cfg.channel.shadow_sigma_db << '|' << cfg.channel.shadow_decorr_m
        << '|' << cfg.channel.shadow_grid_pitch_m << '|' << cfg.channel.shadow_components;

    std::lock_guard<std::mutex> lock(mtx);
    auto& slot = cache[key.str()];
    if (!slot) {
        slot = std::make_shared<ShadowMap>(topo, cfg.channel.shadow_sigma_db,
                                           cfg.channel.shadow_decorr_m,
                                           cfg.channel.shadow_grid_pitch_m,
                                           cfg.channel.shadow_components, cfg.run.seed);
    }
    return slot;
}

FastFading::FastFading(int oscillators, double doppler_hz, std::uint64_t seed)
    : m_(oscillators), doppler_hz_(doppler_hz), seed_(seed) {
    if (oscillators < 1) throw DomainError("fading needs at least one oscillator");
}

double FastFading::gain_db(int cell_id, int beam_index, std::int64_t time_ms) const {
    const double t = static_cast<double>(time_ms) * 1e-3;
    double re = 0.0, im = 0.0;
    for (int k = 0; k < m_; ++k) {
        const auto cell = static_cast<std::uint64_t>(cell_id);
        const auto beam = static_cast<std::uint64_t>(beam_index);
        const auto osc = static_cast<std::uint64_t>(k);
        const double aoa =
            2.0 * kPi * hash01(substream_key(seed_, "fading-aoa", cell, beam, osc));
        const double phase =
            2.0 * kPi * hash01(substream_key(seed_, "fading-phase", cell, beam, osc));
        const double arg = 2.0 * kPi * doppler_hz_ * std::cos(aoa) * t + phase;
        re += std::cos(arg);
        im += std::sin(arg);
    }
    const double power = (re * re + im * im) / m_;
    return 10.0 * std::log10(std::max(power, 1e-12));
}

double rx_power_dbm(const RadioEnv& env, int cell_id, int beam_index,
                    Vec2 ue_pos, double ue_panel_gain_dbi, std::int64_t time_ms) {
    const Cell& cell = env.topo->cells.at(static_cast<std::size_t>(cell_id));
    const Beam& beam = cell.beams.at(static_cast<std::size_t>(beam_index - 1));
    const LocalDirection dir = direction_to(*env.topo, cell, ue_pos);
    double rx = cell.tx_power_dbm + tx_gain_dbi(beam, dir.zenith_deg, dir.azimuth_deg) +
                ue_panel_gain_dbi - path_loss_db(dir.dist3d_m, env.carrier_ghz) -
                env.shadow->at(cell_id, ue_pos);
    if (env.fading) rx += env.fading->gain_db(cell_id, beam_index, time_ms);
    return rx;
}

void beam_rx_powers(const RadioEnv& env, const Cell& cell, Vec2 ue_pos,
                    double ue_panel_gain_dbi, std::int64_t time_ms,
                    std::vector<double>& out) {
    const LocalDirection dir = direction_to(*env.topo, cell, ue_pos);
    const double common = cell.tx_power_dbm + ue_panel_gain_dbi -
                          path_loss_db(dir.dist3d_m, env.carrier_ghz) -
                          env.shadow->at(cell.id, ue_pos);
    out.resize(cell.beams.size());
    for (std::size_t b = 0; b < cell.beams.size(); ++b) {
        double rx = common + tx_gain_dbi(cell.beams[b], dir.zenith_deg, dir.azimuth_deg);
        if (env.fading) rx += env.fading->gain_db(cell.id, cell.beams[b].index, time_ms);
        out[b] = rx;
    }
}

} // namespace chosim
