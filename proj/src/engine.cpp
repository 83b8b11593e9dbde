#include "chosim/engine.hpp"

#include <algorithm>
#include <exception>
#include <memory>
#include <utility>
#include <vector>

#include "chosim/channel.hpp"
#include "chosim/errors.hpp"
#include "chosim/rng.hpp"
#include "chosim/topology.hpp"
#include "chosim/ue.hpp"

namespace chosim {

namespace {

// Everything one UE owns during the run. Workers never touch each other, so
// the per-tick UE loop can run on any number of threads with identical
// results; cross-UE aggregation happens once, serially, at the end.
struct UeWorker {
    UeContext ue;
    HoState ho;
    LinkState link;
    Rng motion;
    std::vector<SignalEvent> events;
    std::vector<std::int64_t> resv; // per cell: ms with a preparation outstanding
    std::vector<LinkSample> scratch;
};

class Simulation {
public:
    explicit Simulation(const SimConfig& cfg)
        : cfg_(cfg),
          topo_(build_topology(cfg)),
          hp_(HoParams::from(cfg)) {
        shadow_ = std::make_unique<ShadowMap>(
            topo_, cfg.channel.shadow_sigma_db, cfg.channel.shadow_decorr_m,
            cfg.channel.shadow_grid_pitch_m, cfg.channel.shadow_components,
            substream_key(cfg.run.seed, "shadow"));
        if (cfg.channel.fading) {
            const double doppler_hz =
                cfg.speed_mps() * cfg.carrier_ghz * 1e9 / 299792458.0;
            fading_ = std::make_unique<FastFading>(cfg.channel.fading_oscillators,
                                                   doppler_hz,
                                                   substream_key(cfg.run.seed, "fading"));
        }
        env_ = RadioEnv{&topo_, shadow_.get(), fading_.get(), cfg.carrier_ghz};

        const int n_cells = topo_.n_cells();
        workers_.resize(static_cast<std::size_t>(cfg.ue.count));
        for (int i = 0; i < cfg.ue.count; ++i) {
            UeWorker& w = workers_[static_cast<std::size_t>(i)];
            Rng drop = make_substream(cfg.run.seed, "drop", static_cast<std::uint64_t>(i));
            w.ue = make_ue(i, cfg, topo_, drop);
            w.motion = make_substream(cfg.run.seed, "motion", static_cast<std::uint64_t>(i));
            measure(w.ue, env_, cfg, 0, w.scratch);
            update_filters(w.ue, w.scratch);
            w.ue.serving_cell = w.ue.best_cell();
            w.ue.serving_beam = w.ue.best_beam(w.ue.serving_cell);
            w.ho.init(n_cells, hp_.max_prepared);
            w.resv.assign(static_cast<std::size_t>(n_cells), 0);
        }
    }

    RunOutputs run(const TickHook& hook) {
        const std::int64_t dt = cfg_.run.step_ms;
        const std::int64_t duration = cfg_.run.duration_ms;
        const bool traced = cfg_.run.trace_ue_id >= 0 &&
                            cfg_.run.trace_ue_id < cfg_.ue.count;

        RunOutputs out;
        if (traced) {
            out.trace.push_back(trace_header());
            out.trace.push_back(trace_row(0));
        }
        notify(hook, 0);

        for (std::int64_t t = dt; t <= duration; t += dt) {
            tick_all(t);
            if (traced && t % cfg_.run.ssb_period_ms == 0)
                out.trace.push_back(trace_row(t));
            notify(hook, t);
        }

        for (UeWorker& w : workers_)
            for (const SignalEvent& ev : w.events) out.ledger.record(ev);
        out.ledger.finalize();

        out.meta = assemble_meta();
        out.report = build_report(out.ledger, out.meta);
        return out;
    }

private:
    void notify(const TickHook& hook, std::int64_t t) {
        if (!hook) return;
        ues_view_.clear();
        hos_view_.clear();
        links_view_.clear();
        for (const UeWorker& w : workers_) {
            ues_view_.push_back(w.ue);
            hos_view_.push_back(w.ho);
            links_view_.push_back(w.link);
        }
        hook(t, ues_view_, hos_view_, links_view_);
    }

    void tick_all(std::int64_t t) {
        const int n = cfg_.ue.count;
#ifdef CHOSIM_HAVE_OPENMP
        if (cfg_.run.parallel) {
            std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(static)
            for (int i = 0; i < n; ++i) {
                try {
                    tick_ue(workers_[static_cast<std::size_t>(i)], t);
                } catch (...) {
#pragma omp critical(chosim_engine_error)
                    if (!first_error) first_error = std::current_exception();
                }
            }
            if (first_error) std::rethrow_exception(first_error);
            return;
        }
#endif
        for (int i = 0; i < n; ++i) tick_ue(workers_[static_cast<std::size_t>(i)], t);
    }

    void tick_ue(UeWorker& w, std::int64_t t) {
        const std::int64_t dt = cfg_.run.step_ms;
        step_motion(w.ue, dt, topo_.bounds, w.motion);

        const bool ssb = t % cfg_.run.ssb_period_ms == 0;
        if (ssb) {
            measure(w.ue, env_, cfg_, t, w.scratch);
            update_filters(w.ue, w.scratch);
            if (w.ue.rrc == RrcState::Connected)
                w.ue.serving_beam = w.ue.best_beam(w.ue.serving_cell);
        }

        bool outage = false;
        switch (w.ue.rrc) {
        case RrcState::Connected: {
            bool exec_started = false;
            if (ssb) {
                ho_ssb_tick(w.ue, w.ho, hp_, t, w.events);
                if (w.ue.rrc == RrcState::Accessing) {
                    begin_access(w.link);
                    exec_started = true;
                }
            }
            // The serving-link rule still decides outage on the instant the
            // execution condition fires; random access occupies the ticks
            // that follow, so a clean handover costs exactly access_ms.
            const double g = sinr_db(env_, cfg_, w.ue, w.ue.serving_cell,
                                     w.ue.serving_beam, t);
            outage = g < cfg_.link.gamma_out_db;
            if (!exec_started &&
                rlf_step(w.link, g, cfg_.link, dt)) {
                declare_rlf(w.ue, w.ho, cfg_.link.t_reest_ms, t, w.events);
            }
            break;
        }
        case RrcState::Accessing: {
            const int target = w.ho.exec_target;
            const double g = sinr_db(env_, cfg_, w.ue, target,
                                     w.ue.best_beam(target), t);
            const AccessOutcome r =
                access_step(w.link, g, cfg_.link, hp_.access_ms, dt);
            if (r == AccessOutcome::Success) {
                complete_handover(w.ue, w.ho, hp_, t, w.events);
                reset_rlf(w.link);
            } else if (r == AccessOutcome::Failure) {
                fail_handover(w.ue, w.ho, cfg_.link.t_reest_ms, t, w.events);
            }
            outage = true;
            break;
        }
        case RrcState::Reestablishing: {
            w.ho.reest_remaining_ms -= dt;
            if (w.ho.reest_remaining_ms <= 0) {
                complete_reestablishment(w.ue, w.ho, t, w.events);
                reset_rlf(w.link);
            }
            outage = true;
            break;
        }
        }

        if (t > cfg_.run.warmup_ms) {
            if (outage) w.link.outage_ms += dt;
            for (const PreparedEntry& e : w.ho.prepared.entries())
                w.resv[static_cast<std::size_t>(e.cell_id)] += dt;
        }
    }

    RunMeta assemble_meta() const {
        RunMeta m;
        m.config_hash = cfg_.hash();
        m.seed = cfg_.run.seed;
        m.mode = cfg_.handover.mode;
        m.scheme = cfg_.ue.scheme;
        m.speed_kmh = cfg_.ue.speed_kmh;
        m.n_ue = cfg_.ue.count;
        m.n_cells = topo_.n_cells();
        m.duration_ms = cfg_.run.duration_ms;
        m.warmup_ms = cfg_.run.warmup_ms;
        m.t_fh_ms = cfg_.kpi.t_fh_ms;
        m.outage_ms.reserve(workers_.size());
        for (const UeWorker& w : workers_) m.outage_ms.push_back(w.link.outage_ms);
        m.resv_ms.assign(static_cast<std::size_t>(topo_.n_cells()), 0);
        for (const UeWorker& w : workers_)
            for (std::size_t c = 0; c < w.resv.size(); ++c) m.resv_ms[c] += w.resv[c];
        return m;
    }

    static std::string trace_header() {
        return "time_ms,x_m,y_m,rrc,serving_cell,sinr_db,"
               "l3_cell_1,l3_dbm_1,l3_cell_2,l3_dbm_2,"
               "l3_cell_3,l3_dbm_3,l3_cell_4,l3_dbm_4";
    }

    std::string trace_row(std::int64_t t) const {
        const UeWorker& w =
            workers_[static_cast<std::size_t>(cfg_.run.trace_ue_id)];
        const UeContext& ue = w.ue;
        std::string row = std::to_string(t);
        row += ',';
        row += format_compact(ue.pos.x);
        row += ',';
        row += format_compact(ue.pos.y);
        row += ',';
        switch (ue.rrc) {
        case RrcState::Connected: row += "connected"; break;
        case RrcState::Accessing: row += "accessing"; break;
        case RrcState::Reestablishing: row += "reestablishing"; break;
        }
        row += ',';
        row += std::to_string(ue.serving_cell);
        row += ',';
        if (ue.rrc == RrcState::Connected) {
            row += format_compact(
                sinr_db(env_, cfg_, ue, ue.serving_cell, ue.serving_beam, t));
        } else if (ue.rrc == RrcState::Accessing) {
            row += format_compact(sinr_db(env_, cfg_, ue, w.ho.exec_target,
                                          ue.best_beam(w.ho.exec_target), t));
        }
        // Strongest four cells by the cell-level filter, for plotting the
        // measurement picture alongside the link.
        std::vector<int> order;
        for (int c = 0; c < ue.n_cells; ++c)
            if (ue.l3_ready(c)) order.push_back(c);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (ue.l3[static_cast<std::size_t>(a)] != ue.l3[static_cast<std::size_t>(b)])
                return ue.l3[static_cast<std::size_t>(a)] > ue.l3[static_cast<std::size_t>(b)];
            return a < b;
        });
        for (std::size_t k = 0; k < 4; ++k) {
            row += ',';
            if (k < order.size()) {
                row += std::to_string(order[k]);
                row += ',';
                row += format_compact(ue.l3[static_cast<std::size_t>(order[k])]);
            } else {
                row += ',';
            }
        }
        return row;
    }

    SimConfig cfg_;
    Topology topo_;
    HoParams hp_;
    std::unique_ptr<ShadowMap> shadow_;
    std::unique_ptr<FastFading> fading_;
    RadioEnv env_;
    std::vector<UeWorker> workers_;

    // Hook views, rebuilt per notification; kept as members to reuse storage.
    std::vector<UeContext> ues_view_;
    std::vector<HoState> hos_view_;
    std::vector<LinkState> links_view_;
};

} // namespace

RunOutputs run_simulation(const SimConfig& cfg, const TickHook& hook) {
    cfg.validate();
    Simulation sim(cfg);
    return sim.run(hook);
}

std::vector<KpiReport> sweep(const SimConfig& base, const SweepAxes& axes,
                             const RunSink& sink) {
    const std::vector<std::string> modes =
        axes.modes.empty() ? std::vector<std::string>{base.handover.mode} : axes.modes;
    const std::vector<std::string> schemes =
        axes.schemes.empty() ? std::vector<std::string>{base.ue.scheme} : axes.schemes;
    const std::vector<double> speeds =
        axes.speeds_kmh.empty() ? std::vector<double>{base.ue.speed_kmh} : axes.speeds_kmh;
    const std::vector<std::uint64_t> seeds =
        axes.seeds.empty() ? std::vector<std::uint64_t>{base.run.seed} : axes.seeds;

    std::vector<KpiReport> reports;
    reports.reserve(modes.size() * schemes.size() * speeds.size() * seeds.size());
    for (const std::string& mode : modes)
        for (const std::string& scheme : schemes)
            for (const double speed : speeds)
                for (const std::uint64_t seed : seeds) {
                    SimConfig cfg = base;
                    cfg.handover.mode = mode;
                    cfg.ue.scheme = scheme;
                    cfg.ue.speed_kmh = speed;
                    cfg.run.seed = seed;
                    reports.push_back(run_simulation(cfg).report);
                    if (sink) sink(reports.back());
                }
    return reports;
}

} // namespace chosim
