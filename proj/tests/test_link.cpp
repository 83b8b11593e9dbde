#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "chosim/channel.hpp"
#include "chosim/errors.hpp"
#include "chosim/link.hpp"
#include "chosim/topology.hpp"
#include "chosim/ue.hpp"

using namespace chosim;

namespace {

// Hand-assembled deployments so interference is fully controlled. Antennas
// sit at the receiver height, which puts outer beams exactly on their
// boresight plane and makes link budgets closed-form.
Topology tiny_topo(const std::vector<Vec2>& site_pos, double tx_dbm) {
    Topology t;
    t.sites = site_pos;
    t.inter_site_distance_m = 200.0;
    t.rx_height_m = 1.5;
    t.bounds = Hexagon{400.0}; // shadow grid extent; sigma is zero anyway
    for (std::size_t s = 0; s < site_pos.size(); ++s) {
        Cell c;
        c.id = static_cast<int>(s);
        c.site_index = static_cast<int>(s);
        c.boresight_deg = 30.0;
        c.tx_power_dbm = tx_dbm;
        c.antenna_height_m = 1.5;
        for (int b = 1; b <= kBeamsPerCell; ++b) c.beams.push_back(make_beam(b));
        t.cells.push_back(c);
    }
    return t;
}

struct Fixture {
    SimConfig cfg;
    Topology topo;
    ShadowMap shadow;
    RadioEnv env;

    explicit Fixture(const std::vector<Vec2>& sites, double tx_dbm = 40.0)
        : cfg(make_cfg()),
          topo(tiny_topo(sites, tx_dbm)),
          shadow(topo, 0.0, 25.0, 5.0, 8, 1),
          env{&topo, &shadow, nullptr, cfg.carrier_ghz} {}

    static SimConfig make_cfg() {
        SimConfig c;
        c.channel.shadow_sigma_db = 0.0; // exact link budgets
        return c;
    }
};

UeContext iso_ue_at(Vec2 pos, int n_cells) {
    UeContext ue;
    ue.id = 0;
    ue.pos = pos;
    ue.heading_deg = 0.0;
    ue.scheme = Scheme::Iso;
    ue.n_cells = n_cells;
    ue.serving_cell = 0;
    ue.serving_beam = 1;
    return ue;
}

// Distance at which beam 1's boresight link lands exactly on the noise
// floor: tx + peak gain - PL(d) = noise.
double noise_floor_distance(double tx_dbm, double peak_gain, double noise_dbm,
                            double f_ghz) {
    return std::pow(10.0, (tx_dbm + peak_gain - noise_dbm - 32.4 -
                           20.0 * std::log10(f_ghz)) /
                              21.0);
}

} // namespace

TEST_CASE("noise power follows thermal density plus bandwidth and figure") {
    CHECK(std::abs(noise_power_dbm(100.0, 9.0) - (-85.0)) < 1e-12);
    CHECK(std::abs(noise_power_dbm(100.0, 0.0) - (-94.0)) < 1e-12);
    CHECK(std::abs(noise_power_dbm(200.0, 9.0) - noise_power_dbm(100.0, 9.0) -
                   10.0 * std::log10(2.0)) < 1e-12);
    CHECK_THROWS_AS(noise_power_dbm(0.0, 9.0), DomainError);
}

TEST_CASE("without interferers the SINR is the signal-to-noise ratio") {
    Fixture fx({Vec2{0.0, 0.0}});
    // Beam 1 of cell 0 points at global azimuth 30 - 52.5 = -22.5 degrees.
    const double d =
        noise_floor_distance(40.0, 29.0, noise_power_dbm(100.0, 9.0), fx.cfg.carrier_ghz);
    UeContext ue = iso_ue_at(unit_from_azimuth(-22.5) * d, 1);

    // S equals N, so the ratio is exactly one.
    CHECK(std::abs(sinr_db(fx.env, fx.cfg, ue, 0, 1, 0)) < 1e-9);

    // At any other distance the SINR equals rx - noise.
    UeContext closer = iso_ue_at(unit_from_azimuth(-22.5) * 150.0, 1);
    const double rx = rx_power_dbm(fx.env, 0, 1, closer.pos, 0.0, 0);
    CHECK(std::abs(sinr_db(fx.env, fx.cfg, closer, 0, 1, 0) - (rx + 85.0)) < 1e-9);
}

TEST_CASE("interference averages the strongest scheduled beams per cell") {
    Fixture fx({Vec2{0.0, 0.0}, Vec2{500.0, 0.0}});
    UeContext ue = iso_ue_at(Vec2{150.0, -60.0}, 2);

    const double got = sinr_db(fx.env, fx.cfg, ue, 0, 1, 0);

    // Reference assembly from the channel primitives.
    std::vector<double> rx(kBeamsPerCell);
    beam_rx_powers(fx.env, fx.topo.cells[1], ue.pos, 0.0, 0, rx);
    std::sort(rx.begin(), rx.end(), std::greater<double>());
    double i_mw = 0.0;
    for (int b = 0; b < 4; ++b) i_mw += std::pow(10.0, rx[static_cast<std::size_t>(b)] / 10.0);
    i_mw /= 4.0;
    const double s_mw = std::pow(10.0, rx_power_dbm(fx.env, 0, 1, ue.pos, 0.0, 0) / 10.0);
    const double n_mw = std::pow(10.0, -85.0 / 10.0);
    const double want = 10.0 * std::log10(s_mw / (n_mw + i_mw));
    CHECK(std::abs(got - want) < 1e-9);

    // Averaging over fewer, stronger beams can only raise the interference.
    SimConfig one_beam = fx.cfg;
    one_beam.link.scheduled_beams = 1;
    CHECK(sinr_db(fx.env, one_beam, ue, 0, 1, 0) <= got + 1e-12);
}

TEST_CASE("3 dB more serving power raises SINR by at most 3 dB") {
    Fixture fx({Vec2{0.0, 0.0}, Vec2{500.0, 0.0}});
    Topology boosted = fx.topo;
    boosted.cells[0].tx_power_dbm += 3.0;
    RadioEnv env2{&boosted, &fx.shadow, nullptr, fx.cfg.carrier_ghz};

    UeContext ue = iso_ue_at(Vec2{150.0, -60.0}, 2);
    const double base = sinr_db(fx.env, fx.cfg, ue, 0, 1, 0);
    const double more = sinr_db(env2, fx.cfg, ue, 0, 1, 0);
    CHECK(more - base > 0.0);
    CHECK(more - base <= 3.0 + 1e-12);
}

TEST_CASE("a panel pointed at the serving cell adds its full gain") {
    Fixture fx({Vec2{0.0, 0.0}});
    const Vec2 pos = unit_from_azimuth(-22.5) * 200.0;
    UeContext iso = iso_ue_at(pos, 1);
    UeContext mpue = iso;
    mpue.scheme = Scheme::MpueA3;
    // The arrival azimuth at the UE is -22.5 + 180; aim panel 0 there.
    mpue.heading_deg = wrap_deg(-22.5 + 180.0);

    const double gamma_iso = sinr_db(fx.env, fx.cfg, iso, 0, 1, 0);
    const double gamma_mpue = sinr_db(fx.env, fx.cfg, mpue, 0, 1, 0);
    CHECK(std::abs(gamma_mpue - gamma_iso - fx.cfg.ue.panel_peak_gain_dbi) < 1e-9);
}

TEST_CASE("radio link failure needs a full second below the exit threshold") {
    SimConfig::LinkCfg link; // -8/-6 thresholds, 1000 ms timer
    LinkState st;

    for (int i = 0; i < 99; ++i) CHECK_FALSE(rlf_step(st, -9.0, link, 10));
    CHECK(rlf_step(st, -9.0, link, 10)); // the 100th step completes 1000 ms
    CHECK(st.rlf_accum_ms == 0);         // armed again after firing
}

TEST_CASE("recovery above the entry threshold resets the failure timer") {
    SimConfig::LinkCfg link;
    LinkState st;
    for (int i = 0; i < 50; ++i) rlf_step(st, -9.0, link, 10);
    CHECK(st.rlf_accum_ms == 500);
    CHECK_FALSE(rlf_step(st, -5.0, link, 10));
    CHECK(st.rlf_accum_ms == 0);
    for (int i = 0; i < 99; ++i) CHECK_FALSE(rlf_step(st, -9.0, link, 10));
    CHECK(rlf_step(st, -9.0, link, 10));
}

TEST_CASE("the hysteresis band holds the timer without resetting it") {
    SimConfig::LinkCfg link;
    LinkState st;
    for (int i = 0; i < 50; ++i) rlf_step(st, -9.0, link, 10);
    for (int i = 0; i < 500; ++i) CHECK_FALSE(rlf_step(st, -7.0, link, 10));
    CHECK(st.rlf_accum_ms == 500); // held, neither grown nor cleared
    for (int i = 0; i < 49; ++i) CHECK_FALSE(rlf_step(st, -9.0, link, 10));
    CHECK(rlf_step(st, -9.0, link, 10));

    // Idle in the band from the start: nothing ever accumulates.
    LinkState idle;
    for (int i = 0; i < 2000; ++i) CHECK_FALSE(rlf_step(idle, -7.0, link, 10));
    CHECK(idle.rlf_accum_ms == 0);
}

TEST_CASE("no failure can be declared at or above the exit threshold") {
    SimConfig::LinkCfg link;
    LinkState st;
    for (int i = 0; i < 5000; ++i) {
        CHECK_FALSE(rlf_step(st, -8.0, link, 10)); // boundary is not below
    }
    CHECK(st.rlf_accum_ms == 0);
}

TEST_CASE("access succeeds after the random-access duration of good link") {
    SimConfig::LinkCfg link;
    LinkState st;
    begin_access(st);
    for (int i = 0; i < 3; ++i) {
        CHECK(access_step(st, 0.0, link, 40, 10) == AccessOutcome::InProgress);
    }
    CHECK(access_step(st, 0.0, link, 40, 10) == AccessOutcome::Success);
}

TEST_CASE("a dead target fails the access after the failure timer") {
    SimConfig::LinkCfg link;
    LinkState st;
    begin_access(st);
    AccessOutcome out = AccessOutcome::InProgress;
    int steps = 0;
    while (out == AccessOutcome::InProgress) {
        out = access_step(st, -10.0, link, 40, 10);
        ++steps;
    }
    CHECK(out == AccessOutcome::Failure);
    CHECK(steps == 20); // 200 ms of continuous bad link
}

TEST_CASE("good spells accumulate across short bad interruptions") {
    SimConfig::LinkCfg link;
    LinkState st;
    begin_access(st);
    // good, good, good, bad, good: the interruption resets nothing but the
    // continuity counter, so the fourth good instant completes the access.
    CHECK(access_step(st, 0.0, link, 40, 10) == AccessOutcome::InProgress);
    CHECK(access_step(st, 0.0, link, 40, 10) == AccessOutcome::InProgress);
    CHECK(access_step(st, 0.0, link, 40, 10) == AccessOutcome::InProgress);
    CHECK(access_step(st, -12.0, link, 40, 10) == AccessOutcome::InProgress);
    CHECK(access_step(st, 0.0, link, 40, 10) == AccessOutcome::Success);
    CHECK(st.access_bad_run_ms == 0);
}

TEST_CASE("an access that stalls too long fails even without a dead spell") {
    SimConfig::LinkCfg link;
    LinkState st;
    begin_access(st);
    // 19 bad instants, one good, repeated: the continuity counter never
    // reaches 200 ms but total time hits the 2 * t_hof cap.
    AccessOutcome out = AccessOutcome::InProgress;
    int steps = 0;
    while (out == AccessOutcome::InProgress) {
        bool good = (steps % 20) == 19;
        out = access_step(st, good ? 0.0 : -10.0, link, 40, 10);
        ++steps;
    }
    CHECK(out == AccessOutcome::Failure);
    CHECK(steps == 40); // 400 ms elapsed
    CHECK(st.access_good_ms < 40);
}

TEST_CASE("the exit threshold itself still advances the access") {
    SimConfig::LinkCfg link;
    LinkState st;
    begin_access(st);
    for (int i = 0; i < 3; ++i) access_step(st, -8.0, link, 40, 10);
    CHECK(access_step(st, -8.0, link, 40, 10) == AccessOutcome::Success);
}

TEST_CASE("outage covers bad serving link, access, and reestablishment") {
    CHECK_FALSE(in_outage(RrcState::Connected, 5.0, -8.0));
    CHECK_FALSE(in_outage(RrcState::Connected, -8.0, -8.0)); // boundary
    CHECK(in_outage(RrcState::Connected, -8.01, -8.0));
    CHECK(in_outage(RrcState::Accessing, 20.0, -8.0));
    CHECK(in_outage(RrcState::Reestablishing, 20.0, -8.0));
}
