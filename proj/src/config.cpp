#include "chosim/config.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "chosim/errors.hpp"

namespace chosim {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Mode m) { return m == Mode::Cho ? "cho" : "fcho"; }

std::string to_string(Scheme s) {
    switch (s) {
    case Scheme::Iso: return "iso";
    case Scheme::MpueA3: return "mpue-a3";
    case Scheme::MpueA1: return "mpue-a1";
    }
    return "iso";
}

Mode mode_from_string(const std::string& s) {
    if (s == "cho") return Mode::Cho;
    if (s == "fcho") return Mode::Fcho;
    throw ConfigError("unknown handover mode '" + s + "' (expected cho|fcho)");
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "iso") return Scheme::Iso;
    if (s == "mpue-a3") return Scheme::MpueA3;
    if (s == "mpue-a1") return Scheme::MpueA1;
    throw ConfigError("unknown UE scheme '" + s + "' (expected iso|mpue-a3|mpue-a1)");
}

void SimConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };

    if (topology.n_sites != 1 && topology.n_sites != 7)
        fail("topology.n_sites must be 1 or 7");
    if (topology.inter_site_distance_m <= 0.0)
        fail("topology.inter_site_distance_m must be > 0");
    if (carrier_ghz <= 0.0) fail("carrier_ghz must be > 0");
    if (bandwidth_mhz <= 0.0) fail("bandwidth_mhz must be > 0");
    if (channel.shadow_sigma_db < 0.0) fail("channel.shadow_sigma_db must be >= 0");
    if (channel.shadow_decorr_m <= 0.0) fail("channel.shadow_decorr_m must be > 0");
    if (channel.shadow_grid_pitch_m <= 0.0) fail("channel.shadow_grid_pitch_m must be > 0");
    if (channel.shadow_components < 8) fail("channel.shadow_components must be >= 8");
    if (ue.count < 1) fail("ue.count must be >= 1");
    if (ue.speed_kmh <= 0.0) fail("ue.speed_kmh must be > 0");
    scheme_from_string(ue.scheme);
    mode_from_string(handover.mode);
    if (handover.o_hys_db <= 0.0) fail("handover.o_hys must be > 0");
    if (handover.o_rel_db != handover.o_prep_db + handover.o_hys_db)
        fail("handover offsets must satisfy o_rel = o_prep + o_hys");
    if (handover.max_prepared < 1) fail("handover.max_prepared must be >= 1");
    if (handover.prep_latency_ms < 0) fail("handover.prep_latency_ms must be >= 0");
    if (handover.access_ms <= 0) fail("handover.access_ms must be > 0");
    if (run.step_ms <= 0) fail("run.step_ms must be > 0");
    if (run.ssb_period_ms <= 0 || run.ssb_period_ms % run.step_ms != 0)
        fail("run.ssb_period_ms must be a positive multiple of run.step_ms");
    if (handover.window_ms <= 0 || handover.window_ms % run.ssb_period_ms != 0)
        fail("handover.window_ms must be a positive multiple of run.ssb_period_ms");
    if (handover.prep_latency_ms % run.step_ms != 0)
        fail("handover.prep_latency_ms must be a multiple of run.step_ms");
    if (handover.access_ms % run.step_ms != 0)
        fail("handover.access_ms must be a multiple of run.step_ms");
    if (link.gamma_in_db < link.gamma_out_db)
        fail("link.gamma_in_db must be >= link.gamma_out_db");
    if (link.t_rlf_ms <= 0 || link.t_hof_ms <= 0 || link.t_reest_ms <= 0)
        fail("link timers must be > 0");
    if (link.scheduled_beams < 1 || link.scheduled_beams > 12)
        fail("link.scheduled_beams must be in 1..12");
    if (kpi.t_fh_ms <= 0) fail("kpi.t_fh_ms must be > 0");
    if (run.duration_ms <= run.warmup_ms)
        fail("run.duration_ms must exceed run.warmup_ms");
    if (run.duration_ms % run.step_ms != 0)
        fail("run.duration_ms must be a multiple of run.step_ms");
    if (run.warmup_ms < 0 || run.warmup_ms % run.step_ms != 0)
        fail("run.warmup_ms must be a non-negative multiple of run.step_ms");
}

ordered_json SimConfig::to_json() const {
    ordered_json j;
    j["carrier_ghz"] = carrier_ghz;
    j["bandwidth_mhz"] = bandwidth_mhz;
    j["noise_figure_db"] = noise_figure_db;
    j["topology"] = {{"n_sites", topology.n_sites},
                     {"inter_site_distance_m", topology.inter_site_distance_m},
                     {"tx_power_dbm", topology.tx_power_dbm},
                     {"tx_height_m", topology.tx_height_m},
                     {"rx_height_m", topology.rx_height_m}};
    j["channel"] = {{"shadow_sigma_db", channel.shadow_sigma_db},
                    {"shadow_decorr_m", channel.shadow_decorr_m},
                    {"shadow_grid_pitch_m", channel.shadow_grid_pitch_m},
                    {"shadow_components", channel.shadow_components},
                    {"fading", channel.fading},
                    {"fading_oscillators", channel.fading_oscillators}};
    j["ue"] = {{"count", ue.count},
               {"speed_kmh", ue.speed_kmh},
               {"scheme", ue.scheme},
               {"panel_peak_gain_dbi", ue.panel_peak_gain_dbi},
               {"panel_floor_dbi", ue.panel_floor_dbi},
               {"bounds_margin_m", ue.bounds_margin_m}};
    j["handover"] = {{"mode", handover.mode},
                     {"o_prep", handover.o_prep_db},
                     {"o_exec", handover.o_exec_db},
                     {"o_rel", handover.o_rel_db},
                     {"o_rep", handover.o_rep_db},
                     {"o_hys", handover.o_hys_db},
                     {"window_ms", handover.window_ms},
                     {"max_prepared", handover.max_prepared},
                     {"prep_latency_ms", handover.prep_latency_ms},
                     {"access_ms", handover.access_ms}};
    j["link"] = {{"gamma_out_db", link.gamma_out_db},
                 {"gamma_in_db", link.gamma_in_db},
                 {"t_rlf_ms", link.t_rlf_ms},
                 {"t_hof_ms", link.t_hof_ms},
                 {"t_reest_ms", link.t_reest_ms},
                 {"scheduled_beams", link.scheduled_beams}};
    j["kpi"] = {{"t_fh_ms", kpi.t_fh_ms}};
    j["run"] = {{"duration_ms", run.duration_ms},
                {"step_ms", run.step_ms},
                {"ssb_period_ms", run.ssb_period_ms},
                {"warmup_ms", run.warmup_ms},
                {"seed", run.seed},
                {"parallel", run.parallel},
                {"trace_ue_id", run.trace_ue_id}};
    return j;
}

namespace {

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out, const std::string& scope) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config key '" + scope + key + "': " + e.what());
    }
}

} // namespace

SimConfig SimConfig::from_json(const ordered_json& j) {
    SimConfig c;
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    read_field(j, "carrier_ghz", c.carrier_ghz, "");
    read_field(j, "bandwidth_mhz", c.bandwidth_mhz, "");
    read_field(j, "noise_figure_db", c.noise_figure_db, "");
    if (auto it = j.find("topology"); it != j.end()) {
        read_field(*it, "n_sites", c.topology.n_sites, "topology.");
        read_field(*it, "inter_site_distance_m", c.topology.inter_site_distance_m, "topology.");
        read_field(*it, "tx_power_dbm", c.topology.tx_power_dbm, "topology.");
        read_field(*it, "tx_height_m", c.topology.tx_height_m, "topology.");
        read_field(*it, "rx_height_m", c.topology.rx_height_m, "topology.");
    }
    if (auto it = j.find("channel"); it != j.end()) {
        read_field(*it, "shadow_sigma_db", c.channel.shadow_sigma_db, "channel.");
        read_field(*it, "shadow_decorr_m", c.channel.shadow_decorr_m, "channel.");
        read_field(*it, "shadow_grid_pitch_m", c.channel.shadow_grid_pitch_m, "channel.");
        read_field(*it, "shadow_components", c.channel.shadow_components, "channel.");
        read_field(*it, "fading", c.channel.fading, "channel.");
        read_field(*it, "fading_oscillators", c.channel.fading_oscillators, "channel.");
    }
    if (auto it = j.find("ue"); it != j.end()) {
        read_field(*it, "count", c.ue.count, "ue.");
        read_field(*it, "speed_kmh", c.ue.speed_kmh, "ue.");
        read_field(*it, "scheme", c.ue.scheme, "ue.");
        read_field(*it, "panel_peak_gain_dbi", c.ue.panel_peak_gain_dbi, "ue.");
        read_field(*it, "panel_floor_dbi", c.ue.panel_floor_dbi, "ue.");
        read_field(*it, "bounds_margin_m", c.ue.bounds_margin_m, "ue.");
    }
    if (auto it = j.find("handover"); it != j.end()) {
        read_field(*it, "mode", c.handover.mode, "handover.");
        // The offsets are in dB; both the bare name and an explicit _db
        // spelling are accepted, with the bare name winning on conflict.
        read_field(*it, "o_prep_db", c.handover.o_prep_db, "handover.");
        read_field(*it, "o_exec_db", c.handover.o_exec_db, "handover.");
        read_field(*it, "o_rel_db", c.handover.o_rel_db, "handover.");
        read_field(*it, "o_rep_db", c.handover.o_rep_db, "handover.");
        read_field(*it, "o_hys_db", c.handover.o_hys_db, "handover.");
        read_field(*it, "o_prep", c.handover.o_prep_db, "handover.");
        read_field(*it, "o_exec", c.handover.o_exec_db, "handover.");
        read_field(*it, "o_rel", c.handover.o_rel_db, "handover.");
        read_field(*it, "o_rep", c.handover.o_rep_db, "handover.");
        read_field(*it, "o_hys", c.handover.o_hys_db, "handover.");
        read_field(*it, "window_ms", c.handover.window_ms, "handover.");
        read_field(*it, "max_prepared", c.handover.max_prepared, "handover.");
        read_field(*it, "prep_latency_ms", c.handover.prep_latency_ms, "handover.");
        read_field(*it, "access_ms", c.handover.access_ms, "handover.");
    }
    if (auto it = j.find("link"); it != j.end()) {
        read_field(*it, "gamma_out_db", c.link.gamma_out_db, "link.");
        read_field(*it, "gamma_in_db", c.link.gamma_in_db, "link.");
        read_field(*it, "t_rlf_ms", c.link.t_rlf_ms, "link.");
        read_field(*it, "t_hof_ms", c.link.t_hof_ms, "link.");
        read_field(*it, "t_reest_ms", c.link.t_reest_ms, "link.");
        read_field(*it, "scheduled_beams", c.link.scheduled_beams, "link.");
    }
    if (auto it = j.find("kpi"); it != j.end()) {
        read_field(*it, "t_fh_ms", c.kpi.t_fh_ms, "kpi.");
    }
    if (auto it = j.find("run"); it != j.end()) {
        read_field(*it, "duration_ms", c.run.duration_ms, "run.");
        read_field(*it, "step_ms", c.run.step_ms, "run.");
        read_field(*it, "ssb_period_ms", c.run.ssb_period_ms, "run.");
        read_field(*it, "warmup_ms", c.run.warmup_ms, "run.");
        read_field(*it, "seed", c.run.seed, "run.");
        read_field(*it, "parallel", c.run.parallel, "run.");
        read_field(*it, "trace_ue_id", c.run.trace_ue_id, "run.");
    }
    return c;
}

SimConfig SimConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
    return from_json(j);
}

void SimConfig::apply_override(const std::string& dotted_key, const std::string& value) {
    ordered_json j = to_json();
    ordered_json* node = &j;
    std::string key = dotted_key;
    // The handover offsets are stored under their bare names; accept the
    // explicit _db spelling here as well.
    for (const char* bare : {"handover.o_prep", "handover.o_exec", "handover.o_rel",
                             "handover.o_rep", "handover.o_hys"}) {
        if (key == std::string(bare) + "_db") {
            key = bare;
            break;
        }
    }
    std::string prefix;
    for (;;) {
        const auto dot = key.find('.');
        if (dot == std::string::npos) break;
        const std::string head = key.substr(0, dot);
        auto it = node->find(head);
        if (it == node->end() || !it->is_object())
            throw ConfigError("unknown config group '" + prefix + head + "'");
        node = &*it;
        prefix += head + ".";
        key = key.substr(dot + 1);
    }
    auto it = node->find(key);
    if (it == node->end())
        throw ConfigError("unknown config key '" + prefix + key + "'");
    if (it->is_object())
        throw ConfigError("config key '" + prefix + key + "' is a group, not a value");
    // Parse the value with the type of the existing leaf; fall back to a
    // raw string for string-typed leaves.
    if (it->is_string()) {
        *it = value;
    } else {
        ordered_json parsed = ordered_json::parse(value, nullptr, false);
        if (parsed.is_discarded())
            throw ConfigError("cannot parse value '" + value + "' for key '" + prefix + key + "'");
        if (it->is_boolean() && !parsed.is_boolean())
            throw ConfigError("key '" + prefix + key + "' expects true|false");
        if (it->is_number() && !parsed.is_number())
            throw ConfigError("key '" + prefix + key + "' expects a number");
        *it = parsed;
    }
    *this = from_json(j);
}

std::string SimConfig::hash() const {
    nlohmann::ordered_json j = to_json();
    // The threading switch and the trace readout cannot alter simulation
    // results, so runs differing only there keep one identity.
    j["run"].erase("parallel");
    j["run"].erase("trace_ue_id");
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace chosim
