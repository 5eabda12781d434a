#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "hom/experiment.hpp"

namespace hom {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    require_config(j.is_object(), where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        if (!key.empty() && key.front() == '_') continue;  // comment keys
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        require_config(known, where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

JonesVectord parse_sop(const json& j, const std::string& where) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "H") return sop::horizontal();
        if (s == "V") return sop::vertical();
        if (s == "D") return sop::diagonal();
        if (s == "A") return sop::antidiagonal();
        if (s == "R") return sop::right_circular();
        if (s == "L") return sop::left_circular();
        throw ConfigError(where + ": unknown SOP name '" + s + "'");
    }
    check_keys(j, {"linear_deg", "h", "v"}, where);
    if (j.contains("linear_deg")) {
        return sop::linear(j.at("linear_deg").get<double>() * std::numbers::pi / 180.0);
    }
    require_config(j.contains("h") && j.contains("v"), where + ": SOP needs 'h' and 'v' as [re, im]");
    const auto h = j.at("h").get<std::array<double, 2>>();
    const auto v = j.at("v").get<std::array<double, 2>>();
    const JonesVectord s{std::complex<double>(h[0], h[1]), std::complex<double>(v[0], v[1])};
    require_config(is_normalized(s), where + ": SOP is not normalized");
    return s;
}

json sop_to_json(const JonesVectord& s) {
    return {{"h", {s(0).real(), s(0).imag()}}, {"v", {s(1).real(), s(1).imag()}}};
}

template <std::size_t N, typename T, typename F>
void read_pair(const json& j, const char* key, std::array<T, N>& out, F&& parse_one) {
    if (!j.contains(key)) return;
    const json& arr = j.at(key);
    require_config(arr.is_array() && arr.size() == N, std::string(key) + ": expected an array of 2");
    for (std::size_t i = 0; i < N; ++i) parse_one(arr[i], out[i], std::string(key) + "[" + std::to_string(i) + "]");
}

void parse_laser(const json& j, LaserSpec& l, const std::string& where) {
    check_keys(j, {"wavelength_nm", "linewidth_hz", "fm_broadening_hz", "mean_photons_per_gate", "sop"}, where);
    read(j, "wavelength_nm", l.wavelength_nm, where);
    read(j, "linewidth_hz", l.linewidth_hz, where);
    read(j, "fm_broadening_hz", l.fm_broadening_hz, where);
    read(j, "mean_photons_per_gate", l.mean_photons_per_gate, where);
    if (j.contains("sop")) l.sop = parse_sop(j.at("sop"), where + ".sop");
}

void parse_link(const json& j, FiberLink& l, const std::string& where) {
    check_keys(j, {"length_km", "attenuation_db_per_km", "drift_rate", "group_index", "differential_rotation_per_nm"},
               where);
    read(j, "length_km", l.length_km, where);
    read(j, "attenuation_db_per_km", l.attenuation_db_per_km, where);
    read(j, "drift_rate", l.drift_rate, where);
    read(j, "group_index", l.group_index, where);
    read(j, "differential_rotation_per_nm", l.differential_rotation_per_nm, where);
}

void parse_detector(const json& j, DetectorSpec& d, const std::string& where) {
    check_keys(j, {"efficiency", "dark_count_prob", "gate_width_s"}, where);
    read(j, "efficiency", d.efficiency, where);
    read(j, "dark_count_prob", d.dark_count_prob, where);
    read(j, "gate_width_s", d.gate_width_s, where);
}

void parse_reference(const json& j, ReferenceChannel& r, const std::string& where) {
    check_keys(j, {"wavelength_nm", "launched", "target"}, where);
    read(j, "wavelength_nm", r.wavelength_nm, where);
    if (j.contains("launched")) r.launched_sop = parse_sop(j.at("launched"), where + ".launched");
    if (j.contains("target")) r.target_sop = parse_sop(j.at("target"), where + ".target");
}

TallyMode parse_tally_mode(const std::string& s) {
    if (s == "expected") return TallyMode::expected;
    if (s == "sampled") return TallyMode::sampled;
    throw ConfigError("tally_mode must be 'expected' or 'sampled'");
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j,
               {"scenario", "seed", "n_gates", "tally_mode", "slices_per_coherence", "baseline_delay_s", "lasers",
                "links", "detectors", "trigger", "control", "perturbation", "polarization_scan", "intensity_scan",
                "dip_scan", "stability", "output"},
               "config");
    require_config(j.contains("scenario") && j.at("scenario").is_string(), "config: 'scenario' is required");
    ScenarioConfig cfg = default_scenario(scenario_kind_from_string(j.at("scenario").get<std::string>()));

    if (j.contains("seed")) {
        require_config(j.at("seed").is_number_unsigned(), "config.seed must be a non-negative integer");
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    read(j, "n_gates", cfg.n_gates, "config");
    if (j.contains("tally_mode")) cfg.tally_mode = parse_tally_mode(j.at("tally_mode").get<std::string>());
    read(j, "slices_per_coherence", cfg.slices_per_coherence, "config");
    read(j, "baseline_delay_s", cfg.baseline_delay_s, "config");

    read_pair(j, "lasers", cfg.lasers, parse_laser);
    read_pair(j, "links", cfg.links, parse_link);
    read_pair(j, "detectors", cfg.detectors, parse_detector);

    if (j.contains("trigger")) {
        const json& t = j.at("trigger");
        check_keys(t, {"delay_line_s"}, "trigger");
        read(t, "delay_line_s", cfg.trigger.delay_line_s, "trigger");
    }
    if (j.contains("control")) {
        const json& c = j.at("control");
        check_keys(c, {"gain", "dither_amplitude", "period_s", "measurement_noise", "warmup_s", "references", "schedule"},
                   "control");
        read(c, "gain", cfg.control.gain, "control");
        read(c, "dither_amplitude", cfg.control.dither_amplitude, "control");
        read(c, "period_s", cfg.control.period_s, "control");
        read(c, "measurement_noise", cfg.control.measurement_noise, "control");
        read(c, "warmup_s", cfg.control.warmup_s, "control");
        read_pair(c, "references", cfg.control.references, parse_reference);
        if (c.contains("schedule")) {
            cfg.control.schedule.clear();
            for (const auto& p : c.at("schedule")) {
                check_keys(p, {"duration_s", "control_on"}, "control.schedule");
                ControlPhase phase{0.0, true};
                read(p, "duration_s", phase.duration_s, "control.schedule");
                read(p, "control_on", phase.control_on, "control.schedule");
                cfg.control.schedule.push_back(phase);
            }
        }
    }
    if (j.contains("perturbation")) {
        std::vector<PerturbationSchedule::Segment> segs;
        for (const auto& s : j.at("perturbation")) {
            check_keys(s, {"start_s", "level"}, "perturbation");
            PerturbationSchedule::Segment seg{0.0, 1.0};
            read(s, "start_s", seg.start_s, "perturbation");
            read(s, "level", seg.level, "perturbation");
            segs.push_back(seg);
        }
        cfg.perturbation = PerturbationSchedule(std::move(segs));
    }
    if (j.contains("polarization_scan")) {
        const json& p = j.at("polarization_scan");
        check_keys(p, {"theta_deg"}, "polarization_scan");
        read(p, "theta_deg", cfg.polarization_scan.theta_deg, "polarization_scan");
    }
    if (j.contains("intensity_scan")) {
        const json& p = j.at("intensity_scan");
        check_keys(p, {"fixed_mu", "ratios"}, "intensity_scan");
        read(p, "fixed_mu", cfg.intensity_scan.fixed_mu, "intensity_scan");
        read(p, "ratios", cfg.intensity_scan.ratios, "intensity_scan");
    }
    if (j.contains("dip_scan")) {
        const json& p = j.at("dip_scan");
        check_keys(p, {"linewidth_sums_hz", "tau_grid_s", "tau_points"}, "dip_scan");
        read(p, "linewidth_sums_hz", cfg.dip_scan.linewidth_sums_hz, "dip_scan");
        read(p, "tau_grid_s", cfg.dip_scan.tau_grid_s, "dip_scan");
        read(p, "tau_points", cfg.dip_scan.tau_points, "dip_scan");
    }
    if (j.contains("stability")) {
        const json& p = j.at("stability");
        check_keys(p, {"bin_s"}, "stability");
        read(p, "bin_s", cfg.stability.bin_s, "stability");
    }
    if (j.contains("output")) {
        const json& p = j.at("output");
        check_keys(p, {"dir", "stem"}, "output");
        read(p, "dir", cfg.output.dir, "output");
        read(p, "stem", cfg.output.stem, "output");
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require_config(in.good(), "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& cfg) {
    json j;
    j["scenario"] = to_string(cfg.kind);
    if (cfg.seed) j["seed"] = *cfg.seed;
    j["n_gates"] = cfg.n_gates;
    j["tally_mode"] = cfg.tally_mode == TallyMode::expected ? "expected" : "sampled";
    j["slices_per_coherence"] = cfg.slices_per_coherence;
    j["baseline_delay_s"] = cfg.baseline_delay_s;
    for (const auto& l : cfg.lasers) {
        j["lasers"].push_back({{"wavelength_nm", l.wavelength_nm},
                               {"linewidth_hz", l.linewidth_hz},
                               {"fm_broadening_hz", l.fm_broadening_hz},
                               {"mean_photons_per_gate", l.mean_photons_per_gate},
                               {"sop", sop_to_json(l.sop)}});
    }
    for (const auto& l : cfg.links) {
        j["links"].push_back({{"length_km", l.length_km},
                              {"attenuation_db_per_km", l.attenuation_db_per_km},
                              {"drift_rate", l.drift_rate},
                              {"group_index", l.group_index},
                              {"differential_rotation_per_nm", l.differential_rotation_per_nm}});
    }
    for (const auto& d : cfg.detectors) {
        j["detectors"].push_back(
            {{"efficiency", d.efficiency}, {"dark_count_prob", d.dark_count_prob}, {"gate_width_s", d.gate_width_s}});
    }
    j["trigger"] = {{"delay_line_s", cfg.trigger.delay_line_s}};
    json refs = json::array();
    for (const auto& r : cfg.control.references) {
        refs.push_back({{"wavelength_nm", r.wavelength_nm},
                        {"launched", sop_to_json(r.launched_sop)},
                        {"target", sop_to_json(r.target_sop)}});
    }
    json schedule = json::array();
    for (const auto& p : cfg.control.schedule) schedule.push_back({{"duration_s", p.duration_s}, {"control_on", p.control_on}});
    j["control"] = {{"gain", cfg.control.gain},
                    {"dither_amplitude", cfg.control.dither_amplitude},
                    {"period_s", cfg.control.period_s},
                    {"measurement_noise", cfg.control.measurement_noise},
                    {"warmup_s", cfg.control.warmup_s},
                    {"references", refs},
                    {"schedule", schedule}};
    json pert = json::array();
    for (const auto& s : cfg.perturbation.segments()) pert.push_back({{"start_s", s.start_s}, {"level", s.level}});
    j["perturbation"] = pert;
    j["polarization_scan"] = {{"theta_deg", cfg.polarization_scan.theta_deg}};
    j["intensity_scan"] = {{"fixed_mu", cfg.intensity_scan.fixed_mu}, {"ratios", cfg.intensity_scan.ratios}};
    j["dip_scan"] = {{"linewidth_sums_hz", cfg.dip_scan.linewidth_sums_hz},
                     {"tau_grid_s", cfg.dip_scan.tau_grid_s},
                     {"tau_points", cfg.dip_scan.tau_points}};
    j["stability"] = {{"bin_s", cfg.stability.bin_s}};
    j["output"] = {{"dir", cfg.output.dir}, {"stem", cfg.output.stem}};
    return j.dump(2);
}

std::string config_hash(const ScenarioConfig& cfg) {
    // FNV-1a over the canonical JSON echo, excluding output paths.
    ScenarioConfig c = cfg;
    c.output = OutputConfig{};
    const std::string text = config_to_json(c);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hom
