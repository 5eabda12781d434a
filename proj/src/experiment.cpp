#include "hom/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace hom {

const char* to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::dip_scan: return "dip";
        case ScenarioKind::polarization_scan: return "polscan";
        case ScenarioKind::intensity_scan: return "intensityscan";
        case ScenarioKind::stability_run: return "stability";
    }
    return "unknown";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
    if (name == "dip" || name == "dip_scan") return ScenarioKind::dip_scan;
    if (name == "polscan" || name == "polarization_scan") return ScenarioKind::polarization_scan;
    if (name == "intensityscan" || name == "intensity_scan") return ScenarioKind::intensity_scan;
    if (name == "stability" || name == "stability_run") return ScenarioKind::stability_run;
    throw ConfigError("unknown scenario kind '" + name + "'");
}

ScenarioConfig default_scenario(ScenarioKind kind) {
    ScenarioConfig cfg;
    cfg.kind = kind;
    cfg.lasers[0].linewidth_hz = 800e3;
    cfg.lasers[1].linewidth_hz = 6e6;
    for (auto& d : cfg.detectors) {
        // Lumped detection efficiency: SPAD efficiency times receiver insertion losses.
        d.efficiency = 0.02;
        d.gate_width_s = 1e-9;
    }
    cfg.output.stem = to_string(kind);
    switch (kind) {
        case ScenarioKind::polarization_scan:
        case ScenarioKind::intensity_scan:
            cfg.n_gates = 1000000;
            break;
        case ScenarioKind::dip_scan:
            cfg.n_gates = 100000;
            for (auto& d : cfg.detectors) d.gate_width_s = 15e-9;
            break;
        case ScenarioKind::stability_run:
            cfg.n_gates = 100000;
            break;
    }
    return cfg;
}

void ScenarioConfig::validate() const {
    require_config(seed.has_value(), "a seed is mandatory (config 'seed' or --seed)");
    require_config(n_gates > 0, "n_gates must be > 0");
    require_config(slices_per_coherence >= 16, "slices_per_coherence must be >= 16");
    for (const auto& l : lasers) l.validate();
    for (const auto& l : links) l.validate();
    for (const auto& d : detectors) d.validate();
    trigger.validate();
    const double widest_gate = std::max(detectors[0].gate_width_s, detectors[1].gate_width_s);
    require_config(baseline_delay_s > widest_gate, "baseline delay must exceed the gate width");
    require_config(lasers[0].mean_photons_per_gate + lasers[1].mean_photons_per_gate > 0.0,
                   "at least one laser must emit");

    switch (kind) {
        case ScenarioKind::polarization_scan:
            require_config(!polarization_scan.theta_deg.empty(), "polarization scan needs angles");
            for (double t : polarization_scan.theta_deg)
                require_config(t >= 0.0 && t <= 90.0, "polarization scan angles must be in [0, 90] deg");
            break;
        case ScenarioKind::intensity_scan:
            require_config(intensity_scan.fixed_mu > 0.0, "intensity scan fixed_mu must be > 0");
            require_config(!intensity_scan.ratios.empty(), "intensity scan needs ratios");
            for (double r : intensity_scan.ratios) require_config(r >= 0.0, "intensity ratios must be >= 0");
            break;
        case ScenarioKind::dip_scan: {
            require_config(!dip_scan.linewidth_sums_hz.empty(), "dip scan needs a linewidth ladder");
            const double base = lasers[0].effective_linewidth_hz() + lasers[1].linewidth_hz;
            for (double l : dip_scan.linewidth_sums_hz)
                require_config(l >= base * (1.0 - 1e-9),
                               "dip scan linewidth sums must be >= the unbroadened linewidth sum");
            require_config(dip_scan.tau_grid_s.size() >= 3 || (dip_scan.tau_grid_s.empty() && dip_scan.tau_points >= 5),
                           "dip scan needs >= 3 explicit delays or tau_points >= 5");
            break;
        }
        case ScenarioKind::stability_run: {
            require_config(stability.bin_s > 0.0, "stability bin must be > 0");
            require_config(control.period_s > 0.0 && control.period_s <= stability.bin_s,
                           "control period must be in (0, bin]");
            require_config(control.gain > 0.0 && control.dither_amplitude > 0.0,
                           "controller gain and dither must be > 0");
            require_config(control.measurement_noise >= 0.0, "measurement noise must be >= 0");
            require_config(control.warmup_s >= 0.0, "warmup must be >= 0");
            validate_reference_pair(control.references);
            bool has_on = false;
            bool has_off = false;
            for (const auto& p : control.schedule) {
                require_config(p.duration_s > 0.0, "control phase durations must be > 0");
                (p.control_on ? has_on : has_off) = true;
            }
            require_config(has_on && has_off, "stability schedule needs an on-phase and an off-phase");
            break;
        }
    }
}

std::size_t Table::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw DomainError("no column named '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Table::column_values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

BlockOptions block_options(const ScenarioConfig& cfg, const RunOptions& opts) {
    BlockOptions b;
    b.detectors = cfg.detectors;
    b.trigger = cfg.trigger;
    b.mode = cfg.tally_mode;
    b.slices_per_coherence = cfg.slices_per_coherence;
    b.threads = opts.threads;
    return b;
}

RunRecord make_record(const ScenarioConfig& cfg) {
    RunRecord rec;
    rec.kind = cfg.kind;
    rec.seed = *cfg.seed;
    rec.config_hash = config_hash(cfg);
    return rec;
}

// State orthogonal to `s`.
JonesVectord orthogonal(const JonesVectord& s) { return {-std::conj(s(1)), std::conj(s(0))}; }

struct MatchedDetuned {
    CoincidenceTally matched;
    CoincidenceTally detuned;
    VisibilityEstimate visibility;
};

MatchedDetuned measure_visibility(const BeamsplitterInputs& in, const ScenarioConfig& cfg, const BlockOptions& base,
                                  Rng& rng) {
    BlockOptions opts = base;
    MatchedDetuned m;
    opts.trigger.gate_delay_offset_s = 0.0;
    m.matched = run_coincidence_block(in, opts, cfg.n_gates, rng);
    opts.trigger.gate_delay_offset_s = cfg.baseline_delay_s;
    m.detuned = run_coincidence_block(in, opts, cfg.n_gates, rng);
    m.visibility = visibility_estimate(m.matched, m.detuned);
    return m;
}

double field_overlap(const BeamsplitterInputs& in) {
    if (in.field_a.norm() == 0.0 || in.field_b.norm() == 0.0) return 0.0;
    return overlap_probability<double>(in.field_a.normalized(), in.field_b.normalized());
}

double intensity_ratio(const BeamsplitterInputs& in) {
    return in.field_b.squaredNorm() / in.field_a.squaredNorm();
}

void log_progress(const RunOptions& opts, const char* fmt, double a, double b) {
    if (!opts.quiet) std::fprintf(stderr, fmt, a, b);
}

const std::array<CompensatorState, 2> identity_compensators{};

}  // namespace

RunRecord run_polarization_scan(const ScenarioConfig& cfg, const RunOptions& opts) {
    require_config(cfg.kind == ScenarioKind::polarization_scan, "run_polarization_scan: wrong scenario kind");
    cfg.validate();
    RunRecord rec = make_record(cfg);
    rec.table.columns = {"theta_deg", "eta_pol",    "ratio_matched",      "ratio_detuned",
                         "visibility", "stderr", "visibility_analytic"};
    const BlockOptions base = block_options(cfg, opts);

    double max_dev = 0.0;
    const auto& thetas = cfg.polarization_scan.theta_deg;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const auto start = Clock::now();
        const double theta = thetas[i] * std::numbers::pi / 180.0;
        auto lasers = cfg.lasers;
        const JonesVectord& s1 = lasers[0].sop;
        lasers[1].sop = normalized<double>(std::cos(theta) * s1 + std::sin(theta) * orthogonal(s1));

        const BeamsplitterInputs in = beamsplitter_inputs(lasers, cfg.links, identity_compensators);
        Rng rng = make_stream(*cfg.seed, stream::point_base + i);
        const MatchedDetuned m = measure_visibility(in, cfg, base, rng);
        const double eta = field_overlap(in);
        const double analytic = visibility_from_ratio(intensity_ratio(in)) * eta;
        max_dev = std::max(max_dev, std::abs(m.visibility.value - analytic));
        rec.table.rows.push_back({thetas[i], eta, m.matched.ratio, m.detuned.ratio, m.visibility.value,
                                  m.visibility.std_error, analytic});
        rec.wall_time_s.push_back(seconds_since(start));
        log_progress(opts, "polscan theta=%g deg  V=%.4f\n", thetas[i], m.visibility.value);
    }
    rec.summary["max_abs_deviation"] = max_dev;
    return rec;
}

RunRecord run_intensity_scan(const ScenarioConfig& cfg, const RunOptions& opts) {
    require_config(cfg.kind == ScenarioKind::intensity_scan, "run_intensity_scan: wrong scenario kind");
    cfg.validate();
    RunRecord rec = make_record(cfg);
    rec.table.columns = {"R",          "mu_fixed", "mu_swept",           "ratio_matched", "ratio_detuned",
                         "visibility", "stderr",   "visibility_analytic"};
    const BlockOptions base = block_options(cfg, opts);

    double max_dev = 0.0;
    const auto& ratios = cfg.intensity_scan.ratios;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        const auto start = Clock::now();
        auto lasers = cfg.lasers;
        lasers[0].mean_photons_per_gate = cfg.intensity_scan.fixed_mu;
        lasers[1].mean_photons_per_gate = cfg.intensity_scan.fixed_mu * ratios[i];
        lasers[1].sop = lasers[0].sop;

        const BeamsplitterInputs in = beamsplitter_inputs(lasers, cfg.links, identity_compensators);
        Rng rng = make_stream(*cfg.seed, stream::point_base + i);
        const MatchedDetuned m = measure_visibility(in, cfg, base, rng);
        const double analytic = visibility_from_ratio(ratios[i]);
        max_dev = std::max(max_dev, std::abs(m.visibility.value - analytic));
        rec.table.rows.push_back({ratios[i], lasers[0].mean_photons_per_gate, lasers[1].mean_photons_per_gate,
                                  m.matched.ratio, m.detuned.ratio, m.visibility.value, m.visibility.std_error,
                                  analytic});
        rec.wall_time_s.push_back(seconds_since(start));
        log_progress(opts, "intensityscan R=%g  V=%.4f\n", ratios[i], m.visibility.value);
    }
    rec.summary["max_abs_deviation"] = max_dev;
    return rec;
}

RunRecord run_stability(const ScenarioConfig& cfg, const RunOptions& opts) {
    require_config(cfg.kind == ScenarioKind::stability_run, "run_stability: wrong scenario kind");
    cfg.validate();
    RunRecord rec = make_record(cfg);
    rec.table.columns = {"t_s",    "ratio_matched", "ratio_detuned", "visibility",
                         "stderr", "control_on",    "pol_overlap",   "visibility_analytic"};
    const BlockOptions base = block_options(cfg, opts);
    const std::uint64_t seed = *cfg.seed;

    Rng init_rng = make_stream(seed, stream::initial_state);
    std::array<Rng, 2> drift_rng{make_stream(seed, stream::drift_a), make_stream(seed, stream::drift_b)};
    std::array<Rng, 2> control_rng{make_stream(seed, stream::control_a), make_stream(seed, stream::control_b)};
    Rng photon_rng = make_stream(seed, stream::photons);

    std::array<ControlledLink, 2> arms;
    for (std::size_t i = 0; i < 2; ++i) {
        arms[i].link = cfg.links[i];
        arms[i].link.birefringence = haar_unitary<double>(init_rng) * cfg.links[i].birefringence;
        arms[i].compensator.gain = cfg.control.gain;
        arms[i].compensator.dither_amplitude = cfg.control.dither_amplitude;
        arms[i].references = cfg.control.references;
        arms[i].quantum_wavelength_nm = cfg.lasers[i].wavelength_nm;
        arms[i].measurement_noise = cfg.control.measurement_noise;
    }

    const double period = cfg.control.period_s;
    const auto warmup_steps = static_cast<std::int64_t>(std::llround(cfg.control.warmup_s / period));
    for (std::int64_t k = 0; k < warmup_steps; ++k) {
        for (std::size_t i = 0; i < 2; ++i)
            advance(arms[i], period, cfg.perturbation.level_at(0.0), true, drift_rng[i], control_rng[i]);
    }

    const double temporal = gate_overlap_factor(cfg.detectors[0].gate_width_s,
                                                cfg.lasers[0].effective_linewidth_hz() +
                                                    cfg.lasers[1].effective_linewidth_hz(),
                                                0.0);
    const auto steps_per_bin = std::max<std::int64_t>(1, std::llround(cfg.stability.bin_s / period));

    double t = 0.0;
    double on_sum = 0.0, on_count = 0.0;
    double off_min = std::numeric_limits<double>::infinity();
    double off_max = -std::numeric_limits<double>::infinity();
    double q_sum = 0.0, q_count = 0.0;
    for (const auto& phase : cfg.control.schedule) {
        const auto bins = std::max<std::int64_t>(1, std::llround(phase.duration_s / cfg.stability.bin_s));
        for (std::int64_t b = 0; b < bins; ++b) {
            const auto start = Clock::now();
            const std::array<CompensatorState, 2> comps{arms[0].compensator, arms[1].compensator};
            const std::array<FiberLink, 2> links{arms[0].link, arms[1].link};
            const BeamsplitterInputs in = beamsplitter_inputs(cfg.lasers, links, comps);
            const MatchedDetuned m = measure_visibility(in, cfg, base, photon_rng);

            const double pol = field_overlap(in);
            const double analytic =
                1.0 - coincidence_ratio_analytic(in.field_a.squaredNorm(), in.field_b.squaredNorm(), pol * temporal);
            rec.table.rows.push_back({t, m.matched.ratio, m.detuned.ratio, m.visibility.value,
                                      m.visibility.std_error, phase.control_on ? 1.0 : 0.0, pol, analytic});
            rec.wall_time_s.push_back(seconds_since(start));
            if (phase.control_on) {
                on_sum += m.visibility.value;
                on_count += 1.0;
            } else {
                off_min = std::min(off_min, m.visibility.value);
                off_max = std::max(off_max, m.visibility.value);
            }
            log_progress(opts, "stability t=%g s  V=%.4f\n", t, m.visibility.value);

            for (std::int64_t k = 0; k < steps_per_bin; ++k) {
                const double level = cfg.perturbation.level_at(t);
                for (std::size_t i = 0; i < 2; ++i) {
                    advance(arms[i], period, level, phase.control_on, drift_rng[i], control_rng[i]);
                    if (phase.control_on) {
                        q_sum += quantum_overlap(arms[i], cfg.lasers[i].sop);
                        q_count += 1.0;
                    }
                }
                t += period;
            }
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.summary["mean_visibility_control_on"] = on_count > 0 ? on_sum / on_count : nan;
    rec.summary["min_visibility_control_off"] = std::isfinite(off_min) ? off_min : nan;
    rec.summary["max_visibility_control_off"] = std::isfinite(off_max) ? off_max : nan;
    rec.summary["mean_quantum_overlap_control_on"] = q_count > 0 ? q_sum / q_count : nan;
    return rec;
}

namespace {

double analytic_fwhm(double gate_width, double linewidth_sum, double eta_pol, double ratio) {
    const double pure = 2.0 * std::numbers::ln2 / (std::numbers::pi * linewidth_sum);
    const double span = 4.0 * pure + 2.0 * gate_width;
    constexpr int n = 2001;
    std::vector<double> tau(n);
    for (int i = 0; i < n; ++i) tau[i] = -span + 2.0 * span * i / (n - 1);
    const auto prof = dip_profile(gate_width, linewidth_sum, tau, eta_pol, ratio);
    std::vector<double> y;
    y.reserve(n);
    for (const auto& p : prof) y.push_back(p.ratio);
    return half_depth_width(tau, y).value_or(std::numeric_limits<double>::quiet_NaN());
}

}  // namespace

RunRecord run_dip_scan(const ScenarioConfig& cfg, const RunOptions& opts) {
    require_config(cfg.kind == ScenarioKind::dip_scan, "run_dip_scan: wrong scenario kind");
    cfg.validate();
    RunRecord rec = make_record(cfg);
    rec.table.columns = {"linewidth_sum_hz",  "tau_s",           "ratio",
                         "ratio_stderr",      "normalized_ratio", "normalized_stderr",
                         "normalized_analytic"};
    Table fwhm;
    fwhm.columns = {"linewidth_sum_hz", "fwhm_s", "fwhm_analytic_s", "dip_depth", "dip_depth_stderr"};
    const BlockOptions base = block_options(cfg, opts);
    const double gate = cfg.detectors[0].gate_width_s;

    const auto& ladder = cfg.dip_scan.linewidth_sums_hz;
    for (std::size_t li = 0; li < ladder.size(); ++li) {
        const auto start = Clock::now();
        auto lasers = cfg.lasers;
        lasers[1].fm_broadening_hz =
            std::max(0.0, ladder[li] - lasers[0].effective_linewidth_hz() - lasers[1].linewidth_hz);
        const BeamsplitterInputs in = beamsplitter_inputs(lasers, cfg.links, identity_compensators);
        const double eta_pol = field_overlap(in);
        const double r = intensity_ratio(in);
        const double fwhm_a = analytic_fwhm(gate, in.linewidth_sum_hz, eta_pol, r);

        std::vector<double> grid = cfg.dip_scan.tau_grid_s;
        if (grid.empty()) {
            const double span = std::max(3.0 * fwhm_a, 2.0 * gate);
            const int n = cfg.dip_scan.tau_points;
            for (int i = 0; i < n; ++i) grid.push_back(-span + 2.0 * span * i / (n - 1));
        }
        std::sort(grid.begin(), grid.end());
        require_config(grid.back() - grid.front() >= 5.0 * fwhm_a * (1.0 - 1e-9),
                       "dip scan delay grid must span at least 5 expected FWHM");

        Rng rng = make_stream(*cfg.seed, stream::point_base + li);
        const DelayScan scan =
            scan_gate_delay([&] { return in; }, base, grid, cfg.baseline_delay_s, cfg.n_gates, rng);
        const auto analytic = dip_profile(gate, in.linewidth_sum_hz, grid, eta_pol, r);
        for (std::size_t k = 0; k < scan.points.size(); ++k) {
            const auto& p = scan.points[k];
            rec.table.rows.push_back({in.linewidth_sum_hz, p.tau_s, p.tally.ratio, p.tally.ratio_stderr,
                                      p.normalized, p.normalized_stderr, analytic[k].ratio});
        }
        const double elapsed = seconds_since(start);
        for (std::size_t k = 0; k < scan.points.size(); ++k) rec.wall_time_s.push_back(elapsed / scan.points.size());

        const auto min_it = std::min_element(scan.points.begin(), scan.points.end(),
                                             [](const auto& a, const auto& b) { return a.normalized < b.normalized; });
        const double fw = estimate_fwhm(rec, in.linewidth_sum_hz).value_or(std::numeric_limits<double>::quiet_NaN());
        fwhm.rows.push_back({in.linewidth_sum_hz, fw, fwhm_a, 1.0 - min_it->normalized, min_it->normalized_stderr});
        log_progress(opts, "dip linewidth=%g Hz  FWHM=%g s\n", in.linewidth_sum_hz, fw);
    }

    const auto fw = fwhm.column_values("fwhm_s");
    bool decreasing = std::all_of(fw.begin(), fw.end(), [](double v) { return std::isfinite(v); });
    for (std::size_t i = 1; i < fw.size() && decreasing; ++i) decreasing = fw[i] < fw[i - 1];
    rec.summary["fwhm_strictly_decreasing"] = decreasing ? 1.0 : 0.0;
    rec.summary["fwhm_ratio_first_last"] = fw.size() >= 2 ? fw.front() / fw.back()
                                                          : std::numeric_limits<double>::quiet_NaN();
    rec.fwhm_table = std::move(fwhm);
    return rec;
}

RunRecord run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
    switch (cfg.kind) {
        case ScenarioKind::dip_scan: return run_dip_scan(cfg, opts);
        case ScenarioKind::polarization_scan: return run_polarization_scan(cfg, opts);
        case ScenarioKind::intensity_scan: return run_intensity_scan(cfg, opts);
        case ScenarioKind::stability_run: return run_stability(cfg, opts);
    }
    throw ConfigError("unknown scenario kind");
}

std::optional<double> estimate_fwhm(const RunRecord& record, double linewidth_sum_hz) {
    require_domain(record.kind == ScenarioKind::dip_scan, "estimate_fwhm: not a dip-scan record");
    const Table& t = record.table;
    const std::size_t cl = t.column("linewidth_sum_hz");
    const std::size_t ct = t.column("tau_s");
    const std::size_t cn = t.column("normalized_ratio");
    const std::size_t cs = t.column("normalized_stderr");
    std::vector<double> tau, y, se;
    for (const auto& row : t.rows) {
        if (std::abs(row[cl] - linewidth_sum_hz) > 1e-9 * linewidth_sum_hz) continue;
        tau.push_back(row[ct]);
        y.push_back(row[cn]);
        se.push_back(row[cs]);
    }
    if (tau.size() < 3) return std::nullopt;
    const auto imin = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
    return half_depth_width(tau, y, 3.0 * se[imin]);
}

}  // namespace hom
