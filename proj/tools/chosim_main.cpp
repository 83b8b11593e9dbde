#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "chosim/engine.hpp"
#include "chosim/errors.hpp"
#include "chosim/topology.hpp"

namespace fs = std::filesystem;
using namespace chosim;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string mode;
    std::string scheme;
    double speed_kmh = 0.0;
    double duration_s = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    std::string out_dir = "out";
    bool force = false;

    bool mode_set = false, scheme_set = false, speed_set = false;
    bool duration_set = false, seed_set = false;
};

void add_common_flags(CLI::App& cmd, CommonArgs& a, bool with_out = true) {
    cmd.add_option("--config", a.config_path, "Configuration JSON; defaults apply when omitted")
        ->check(CLI::ExistingFile);
    cmd.add_option("--mode", a.mode, "Handover mode: cho|fcho")
        ->each([&](const std::string&) { a.mode_set = true; });
    cmd.add_option("--scheme", a.scheme, "UE antenna scheme: iso|mpue-a3|mpue-a1")
        ->each([&](const std::string&) { a.scheme_set = true; });
    cmd.add_option("--speed", a.speed_kmh, "UE speed in km/h")
        ->each([&](const std::string&) { a.speed_set = true; });
    cmd.add_option("--duration", a.duration_s, "Simulated time in seconds")
        ->each([&](const std::string&) { a.duration_set = true; });
    cmd.add_option("--seed", a.seed, "Master random seed")
        ->each([&](const std::string&) { a.seed_set = true; });
    cmd.add_option("--set", a.overrides,
                   "Dotted-key override, e.g. --set handover.o_exec=3 (repeatable)");
    if (with_out) {
        cmd.add_option("--out", a.out_dir, "Output directory (created if absent)");
        cmd.add_flag("--force", a.force, "Overwrite existing output files");
    }
}

// Keys under "sweep." select sweep axes; everything else lands in the config.
struct SweepSpec {
    SweepAxes axes;
    bool any = false;
};

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> seeds;
    const auto range = s.find("..");
    if (range != std::string::npos) {
        const std::uint64_t lo = std::stoull(s.substr(0, range));
        const std::uint64_t hi = std::stoull(s.substr(range + 2));
        if (hi < lo) throw ConfigError("seed range '" + s + "' is descending");
        for (std::uint64_t v = lo; v <= hi; ++v) seeds.push_back(v);
        return seeds;
    }
    for (const std::string& part : split_csv(s)) seeds.push_back(std::stoull(part));
    return seeds;
}

SimConfig build_config(const CommonArgs& a, SweepSpec* sweep_spec) {
    SimConfig cfg;
    if (!a.config_path.empty()) cfg = SimConfig::load_file(a.config_path);
    if (a.mode_set) cfg.handover.mode = a.mode;
    if (a.scheme_set) cfg.ue.scheme = a.scheme;
    if (a.speed_set) cfg.ue.speed_kmh = a.speed_kmh;
    if (a.duration_set)
        cfg.run.duration_ms = static_cast<std::int64_t>(a.duration_s * 1000.0 + 0.5);
    if (a.seed_set) cfg.run.seed = a.seed;

    for (const std::string& kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (key.rfind("sweep.", 0) == 0) {
            if (!sweep_spec)
                throw ConfigError("'" + key + "' is only meaningful for the sweep command");
            sweep_spec->any = true;
            const std::string axis = key.substr(6);
            if (axis == "modes") {
                sweep_spec->axes.modes = split_csv(val);
            } else if (axis == "schemes") {
                sweep_spec->axes.schemes = split_csv(val);
            } else if (axis == "speeds") {
                sweep_spec->axes.speeds_kmh.clear();
                for (const std::string& part : split_csv(val))
                    sweep_spec->axes.speeds_kmh.push_back(std::stod(part));
            } else if (axis == "seeds") {
                sweep_spec->axes.seeds = parse_seed_list(val);
            } else {
                throw ConfigError("unknown sweep axis '" + key +
                                  "' (sweep.modes|schemes|speeds|seeds)");
            }
        } else {
            cfg.apply_override(key, val);
        }
    }
    cfg.validate();
    return cfg;
}

fs::path prepare_output(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
    return p;
}

void write_file(const fs::path& path, const std::string& content, bool force) {
    if (fs::exists(path) && !force)
        throw ConfigError("refusing to overwrite " + path.string() + " (pass --force)");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

std::string echo_json(const SimConfig& cfg) {
    nlohmann::ordered_json echo;
    echo["config_hash"] = cfg.hash();
    echo["seed"] = cfg.run.seed;
    echo["config"] = cfg.to_json();
    return echo.dump(2) + "\n";
}

void write_run_outputs(const fs::path& dir, const SimConfig& cfg, const RunOutputs& out,
                       bool force) {
    write_file(dir / "config-echo.json", echo_json(cfg), force);

    const fs::path events = dir / "events.csv";
    if (fs::exists(events) && !force)
        throw ConfigError("refusing to overwrite " + events.string() + " (pass --force)");
    write_events_csv(events.string(), out.ledger, out.meta);

    write_file(dir / "kpi.json", out.report.to_json().dump(2) + "\n", force);
    write_file(dir / "kpi.csv", kpi_csv_header() + "\n" + kpi_csv_row(out.report) + "\n",
               force);
    if (!out.trace.empty()) {
        std::string trace = "# config_hash=" + cfg.hash() + "\n# seed=" +
                            std::to_string(cfg.run.seed) + "\n";
        for (const std::string& row : out.trace) {
            trace += row;
            trace += '\n';
        }
        write_file(dir / "trace.csv", trace, force);
    }
}

int cmd_run(const CommonArgs& a) {
    const SimConfig cfg = build_config(a, nullptr);
    const fs::path dir = prepare_output(a.out_dir);
    const RunOutputs out = run_simulation(cfg);
    write_run_outputs(dir, cfg, out, a.force);
    std::printf("run: %s mode=%s scheme=%s speed=%.0f seed=%llu -> %s\n",
                cfg.hash().c_str(), cfg.handover.mode.c_str(), cfg.ue.scheme.c_str(),
                cfg.ue.speed_kmh, static_cast<unsigned long long>(cfg.run.seed),
                dir.string().c_str());
    return 0;
}

struct MeanAcc {
    double fail = 0, fast = 0, outage = 0;
    double fail_sq = 0, fast_sq = 0, outage_sq = 0;
    double prep = 0, rel = 0, rep = 0, fcho_cfg = 0, total = 0;
    long n = 0;

    void add(const KpiReport& r) {
        fail += r.mobility_failure_pct;
        fast += r.fast_handover_pct;
        outage += r.outage_pct;
        fail_sq += r.mobility_failure_pct * r.mobility_failure_pct;
        fast_sq += r.fast_handover_pct * r.fast_handover_pct;
        outage_sq += r.outage_pct * r.outage_pct;
        prep += r.overhead.prepare_per_ue_min;
        rel += r.overhead.release_per_ue_min;
        rep += r.overhead.replace_per_ue_min;
        fcho_cfg += r.overhead.fcho_cfg_per_ue_min;
        total += r.overhead.total_cho_events_per_ue_min;
        ++n;
    }
};

double mean(double sum, long n) { return n ? sum / static_cast<double>(n) : 0.0; }

double stddev(double sum, double sq, long n) {
    if (n < 2) return 0.0;
    const double m = sum / static_cast<double>(n);
    const double var = std::max(0.0, sq / static_cast<double>(n) - m * m);
    return std::sqrt(var);
}

int cmd_sweep(const CommonArgs& a) {
    SweepSpec spec;
    const SimConfig base = build_config(a, &spec);
    if (spec.axes.modes.empty()) spec.axes.modes = {"cho", "fcho"};
    if (spec.axes.schemes.empty()) spec.axes.schemes = {"iso", "mpue-a3", "mpue-a1"};

    const fs::path dir = prepare_output(a.out_dir);
    const fs::path rows_path = dir / "comparison.csv";
    const fs::path means_path = dir / "comparison-means.csv";
    for (const fs::path& p : {rows_path, means_path})
        if (fs::exists(p) && !a.force)
            throw ConfigError("refusing to overwrite " + p.string() + " (pass --force)");
    write_file(dir / "config-echo.json", echo_json(base), a.force);

    // Rows stream to disk as runs finish so an aborted sweep keeps its
    // completed part.
    std::ofstream rows(rows_path, std::ios::binary | std::ios::trunc);
    if (!rows) throw ConfigError("cannot write " + rows_path.string());
    rows << kpi_csv_header() << "\n" << std::flush;

    std::map<std::string, MeanAcc> groups;
    std::vector<std::string> group_order;
    long n_runs = 0;
    const RunSink sink = [&](const KpiReport& r) {
        ++n_runs;
        rows << kpi_csv_row(r) << "\n" << std::flush;
        char key[96];
        std::snprintf(key, sizeof key, "%s,%s,%s", r.mode.c_str(), r.scheme.c_str(),
                      format_compact(r.speed_kmh).c_str());
        if (groups.find(key) == groups.end()) group_order.push_back(key);
        groups[key].add(r);
        std::printf("  %s seed=%llu: failures=%.3f%% fast=%.2f%% outage=%.2f%% total=%.1f/ue/min\n",
                    key, static_cast<unsigned long long>(r.seed), r.mobility_failure_pct,
                    r.fast_handover_pct, r.outage_pct,
                    r.overhead.total_cho_events_per_ue_min);
    };

    sweep(base, spec.axes, sink);

    std::string means = "# config_hash=" + base.hash() + "\n# seed=" +
                        std::to_string(base.run.seed) + "\n";
    means += "mode,scheme,speed_kmh,n_runs,"
                        "mobility_failure_pct_mean,mobility_failure_pct_std,"
                        "fast_handover_pct_mean,fast_handover_pct_std,"
                        "outage_pct_mean,outage_pct_std,"
                        "prepare_per_ue_min_mean,release_per_ue_min_mean,"
                        "replace_per_ue_min_mean,fcho_cfg_per_ue_min_mean,"
                        "total_cho_events_per_ue_min_mean\n";
    for (const std::string& key : group_order) {
        const MeanAcc& g = groups[key];
        means += key;
        means += ',' + std::to_string(g.n);
        means += ',' + format_compact(mean(g.fail, g.n));
        means += ',' + format_compact(stddev(g.fail, g.fail_sq, g.n));
        means += ',' + format_compact(mean(g.fast, g.n));
        means += ',' + format_compact(stddev(g.fast, g.fast_sq, g.n));
        means += ',' + format_compact(mean(g.outage, g.n));
        means += ',' + format_compact(stddev(g.outage, g.outage_sq, g.n));
        means += ',' + format_compact(mean(g.prep, g.n));
        means += ',' + format_compact(mean(g.rel, g.n));
        means += ',' + format_compact(mean(g.rep, g.n));
        means += ',' + format_compact(mean(g.fcho_cfg, g.n));
        means += ',' + format_compact(mean(g.total, g.n));
        means += '\n';
    }
    write_file(means_path, means, true);
    std::printf("sweep: %ld runs in %zu groups -> %s\n", n_runs, group_order.size(),
                dir.string().c_str());
    return 0;
}

int cmd_topology(const CommonArgs& a) {
    const SimConfig cfg = build_config(a, nullptr);
    const fs::path dir = prepare_output(a.out_dir);
    const Topology topo = build_topology(cfg);
    nlohmann::ordered_json doc;
    doc["config_hash"] = cfg.hash();
    doc["seed"] = cfg.run.seed;
    doc["topology"] = topo.to_json();
    write_file(dir / "topology.json", doc.dump(2) + "\n", a.force);
    std::printf("topology: %d cells -> %s\n", topo.n_cells(),
                (dir / "topology.json").string().c_str());
    return 0;
}

int cmd_report(const std::string& events_path, const CommonArgs& a) {
    const ParsedRun parsed = read_events_csv(events_path);
    const KpiReport report = build_report(parsed.ledger, parsed.meta);
    const fs::path dir = prepare_output(a.out_dir);
    write_file(dir / "kpi.json", report.to_json().dump(2) + "\n", a.force);
    write_file(dir / "kpi.csv", kpi_csv_header() + "\n" + kpi_csv_row(report) + "\n",
               a.force);
    std::printf("report: %s seed=%llu -> %s\n", report.config_hash.c_str(),
                static_cast<unsigned long long>(report.seed), dir.string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-beam cellular mobility simulator: conditional handover "
                 "signaling, failures, and KPI reporting"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, topo_args, report_args;
    std::string events_path;

    CLI::App* run = app.add_subcommand("run", "Simulate one configuration");
    add_common_flags(*run, run_args);

    CLI::App* swp = app.add_subcommand(
        "sweep", "Run a mode x scheme x speed x seed grid and aggregate");
    add_common_flags(*swp, sweep_args);

    CLI::App* topo = app.add_subcommand("topology", "Dump the cell grid as JSON");
    add_common_flags(*topo, topo_args);

    CLI::App* rep = app.add_subcommand("report", "Recompute KPIs from an events.csv");
    rep->add_option("events", events_path, "events.csv produced by a run")
        ->required()
        ->check(CLI::ExistingFile);
    rep->add_option("--out", report_args.out_dir, "Output directory (created if absent)");
    rep->add_flag("--force", report_args.force, "Overwrite existing output files");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(run_args);
        if (swp->parsed()) return cmd_sweep(sweep_args);
        if (topo->parsed()) return cmd_topology(topo_args);
        if (rep->parsed()) return cmd_report(events_path, report_args);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
}
