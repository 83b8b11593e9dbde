#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "chosim/channel.hpp"
#include "chosim/config.hpp"
#include "chosim/rng.hpp"
#include "chosim/topology.hpp"

using namespace chosim;

namespace {

Vec2 random_point_in(const Hexagon& bounds, Rng& rng) {
    for (;;) {
        const Vec2 p{rng.uniform(-bounds.circumradius, bounds.circumradius),
                     rng.uniform(-bounds.circumradius, bounds.circumradius)};
        if (bounds.contains(p)) return p;
    }
}

} // namespace

TEST_CASE("path loss: clamped log-distance curve") {
    CHECK(path_loss_db(1.0, 28.0) == doctest::Approx(61.343160626844385));
    CHECK(path_loss_db(100.0, 28.0) == doctest::Approx(103.343160626844385));
    CHECK(std::abs(path_loss_db(100.0, 28.0) - 103.35) < 0.01);
    CHECK(path_loss_db(0.2, 28.0) == path_loss_db(1.0, 28.0));
    CHECK(path_loss_db(200.0, 28.0) > path_loss_db(100.0, 28.0));
    // Doubling distance costs 21 log10(2), doubling frequency 20 log10(2).
    CHECK(path_loss_db(200.0, 28.0) - path_loss_db(100.0, 28.0) ==
          doctest::Approx(21.0 * std::log10(2.0)));
    CHECK(path_loss_db(100.0, 56.0) - path_loss_db(100.0, 28.0) ==
          doctest::Approx(20.0 * std::log10(2.0)));
}

TEST_CASE("shadow field is deterministic and distinct per cell") {
    SimConfig cfg;
    cfg.topology.n_sites = 1;
    const Topology topo = build_topology(cfg);
    const ShadowMap map(topo, 4.0, 25.0, 5.0, 64, 77);
    const ShadowMap same(topo, 4.0, 25.0, 5.0, 64, 77);
    const ShadowMap other(topo, 4.0, 25.0, 5.0, 64, 78);

    const Vec2 p{12.3, -45.6};
    CHECK(map.at(0, p) == map.at(0, p));
    CHECK(map.at(0, p) == same.at(0, p));
    CHECK(map.at(0, p) != other.at(0, p));
    CHECK(map.at(0, p) != map.at(1, p));
    CHECK(map.at(0, p) != map.at(2, p));

    // Bilinear interpolation keeps the field continuous.
    CHECK(std::abs(map.at(0, p) - map.at(0, {p.x + 0.01, p.y})) < 0.05);
}

TEST_CASE("shadow field statistics: zero mean, sigma scale, exponential correlation") {
    SimConfig cfg;
    cfg.topology.n_sites = 1;
    const Topology topo = build_topology(cfg);
    const double sigma = 4.0, dcor = 25.0;

    Rng rng(2024);
    std::vector<double> values;
    std::vector<double> a25, b25, a50, b50;
    const int n_fields = 2000;
    for (int f = 0; f < n_fields; ++f) {
        const ShadowMap map(topo, sigma, dcor, 5.0, 16, 50000 + f);
        const int cell = f % 3;
        for (int k = 0; k < 5; ++k) {
            values.push_back(map.at(cell, random_point_in(topo.bounds, rng)));
        }
        for (int k = 0; k < 2; ++k) {
            const Vec2 p{rng.uniform(-80.0, 80.0), rng.uniform(-80.0, 80.0)};
            const double ang = rng.uniform(0.0, 2.0 * kPi);
            const Vec2 u{std::cos(ang), std::sin(ang)};
            a25.push_back(map.at(cell, p));
            b25.push_back(map.at(cell, {p.x + 25.0 * u.x, p.y + 25.0 * u.y}));
            a50.push_back(map.at(cell, p));
            b50.push_back(map.at(cell, {p.x + 50.0 * u.x, p.y + 50.0 * u.y}));
        }
    }

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    CHECK(std::abs(mean) < 3.0 * sigma / 100.0);

    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    // Bilinear interpolation between grid nodes shaves a little variance.
    CHECK(std::sqrt(var) == doctest::Approx(sigma).epsilon(0.08));

    auto pearson = [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto n = static_cast<double>(x.size());
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
        mx /= n; my /= n;
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
            syy += (y[i] - my) * (y[i] - my);
        }
        return sxy / std::sqrt(sxx * syy);
    };
    CHECK(std::abs(pearson(a25, b25) - std::exp(-1.0)) < 0.1);
    CHECK(std::abs(pearson(a50, b50) - std::exp(-2.0)) < 0.1);
}

TEST_CASE("fast fading has unit mean linear power and is stateless") {
    const FastFading fading(16, 100.0, 5);
    double sum = 0.0;
    int n = 0;
    for (int cell = 0; cell < 21; ++cell) {
        for (int beam = 1; beam <= 12; ++beam) {
            for (int t = 0; t < 400; ++t) {
                const double g = fading.gain_db(cell, beam, t * 20);
                sum += std::pow(10.0, g / 10.0);
                ++n;
            }
        }
    }
    CHECK(n >= 100000);
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.05));

    CHECK(fading.gain_db(3, 7, 120) == fading.gain_db(3, 7, 120));
    CHECK(fading.gain_db(3, 7, 120) != fading.gain_db(3, 8, 120));
}

TEST_CASE("received power is the additive component sum") {
    // Equal antenna heights put the horizon beams exactly on boresight.
    SimConfig cfg;
    cfg.topology.tx_height_m = 1.5;
    const Topology topo = build_topology(cfg);
    const ShadowMap zero_shadow(topo, 0.0, 25.0, 5.0, 16, 1);
    const RadioEnv env{&topo, &zero_shadow, nullptr, 28.0};

    // Cell 0 boresight is 30 deg; its beam 1 points at 30 - 52.5 = -22.5.
    const Vec2 pos = unit_from_azimuth(-22.5) * 100.0;
    const double rx = rx_power_dbm(env, 0, 1, pos, 0.0, 0);
    CHECK(rx == doctest::Approx(40.0 + 29.0 - 103.343160626844385));
    CHECK(std::abs(rx - -34.35) < 0.01);

    // A panel gain enters additively, dB for dB.
    CHECK(rx_power_dbm(env, 0, 1, pos, 5.0, 0) == doctest::Approx(rx + 5.0));

    // With fading off the link is time-invariant.
    CHECK(rx_power_dbm(env, 0, 1, pos, 0.0, 31540) == rx);

    // Shadow enters with a minus sign.
    const ShadowMap shadow(topo, 4.0, 25.0, 5.0, 64, 9);
    const RadioEnv env_sh{&topo, &shadow, nullptr, 28.0};
    CHECK(rx_power_dbm(env_sh, 0, 1, pos, 0.0, 0) ==
          doctest::Approx(rx - shadow.at(0, pos)));

    // Fading enters additively too.
    const FastFading fading(16, 50.0, 2);
    const RadioEnv env_fad{&topo, &shadow, &fading, 28.0};
    CHECK(rx_power_dbm(env_fad, 0, 1, pos, 0.0, 340) ==
          doctest::Approx(rx_power_dbm(env_sh, 0, 1, pos, 0.0, 340) +
                          fading.gain_db(0, 1, 340)));
}

TEST_CASE("whole-cell sweep matches per-beam queries") {
    SimConfig cfg;
    const Topology topo = build_topology(cfg);
    const ShadowMap shadow(topo, 4.0, 25.0, 5.0, 64, 3);
    const FastFading fading(16, 80.0, 3);
    const RadioEnv env{&topo, &shadow, &fading, 28.0};

    Rng rng(5);
    std::vector<double> batch;
    for (int rep = 0; rep < 20; ++rep) {
        const Vec2 pos = random_point_in(topo.bounds, rng);
        const auto& cell = topo.cells[static_cast<std::size_t>(rep) % topo.cells.size()];
        beam_rx_powers(env, cell, pos, 3.0, rep * 20, batch);
        REQUIRE(batch.size() == 12);
        for (int b = 1; b <= 12; ++b) {
            CHECK(batch[static_cast<std::size_t>(b - 1)] ==
                  doctest::Approx(rx_power_dbm(env, cell.id, b, pos, 3.0, rep * 20))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("shadow map cache hands out one field per configuration") {
    SimConfig cfg;
    cfg.topology.n_sites = 1;
    cfg.run.seed = 4242;
    const Topology topo = build_topology(cfg);
    const auto a = shared_shadow_map(topo, cfg);
    const auto b = shared_shadow_map(topo, cfg);
    CHECK(a.get() == b.get());

    SimConfig cfg2 = cfg;
    cfg2.run.seed = 4243;
    const auto c = shared_shadow_map(topo, cfg2);
    CHECK(a.get() != c.get());
}
