#pragma once

// Scenario harness: polarization scan, intensity-ratio scan, gate-delay dip
// scan over a linewidth ladder, and the long stability run with the
// polarization controller switched on and then off.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hom/channel.hpp"
#include "hom/control.hpp"
#include "hom/detection.hpp"
#include "hom/optics.hpp"

namespace hom {

inline constexpr const char* version_string = "0.1.0";

enum class ScenarioKind { dip_scan, polarization_scan, intensity_scan, stability_run };

const char* to_string(ScenarioKind kind);
/// Accepts the CLI names (dip, polscan, intensityscan, stability) and the enum spellings.
ScenarioKind scenario_kind_from_string(const std::string& name);

struct ControlPhase {
    double duration_s;
    bool control_on;
};

struct ControlConfig {
    double gain = 0.3;
    double dither_amplitude = 0.05;
    double period_s = 0.01;
    double measurement_noise = 0.0;
    /// Simulated settling time before recording starts (controller on).
    double warmup_s = 120.0;
    std::array<ReferenceChannel, 2> references = default_references();
    std::vector<ControlPhase> schedule{{2520.0, true}, {1800.0, false}};
};

struct PolarizationScanConfig {
    std::vector<double> theta_deg{0, 10, 20, 30, 40, 45, 50, 60, 70, 80, 90};
};

struct IntensityScanConfig {
    double fixed_mu = 1.0;
    std::vector<double> ratios{0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0};
};

struct DipScanConfig {
    /// Combined effective linewidths; the second laser is FM-broadened to reach each.
    std::vector<double> linewidth_sums_hz{6.8e6, 20e6, 50e6, 100e6};
    /// Explicit delays; when empty a symmetric grid of `tau_points` spanning
    /// +/- 3 analytic FWHM (at least +/- 2 gate widths) is used per linewidth.
    std::vector<double> tau_grid_s;
    int tau_points = 41;
};

struct StabilityConfig {
    double bin_s = 10.0;
};

struct OutputConfig {
    std::string dir = ".";
    std::string stem;  ///< defaults to the scenario's CLI name
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::stability_run;
    std::optional<std::uint64_t> seed;
    std::int64_t n_gates = 100000;
    TallyMode tally_mode = TallyMode::expected;
    int slices_per_coherence = 16;
    double baseline_delay_s = 1e-6;

    std::array<LaserSpec, 2> lasers;
    std::array<FiberLink, 2> links;
    std::array<DetectorSpec, 2> detectors;
    TriggerScheme trigger;
    ControlConfig control;
    PerturbationSchedule perturbation;

    PolarizationScanConfig polarization_scan;
    IntensityScanConfig intensity_scan;
    DipScanConfig dip_scan;
    StabilityConfig stability;
    OutputConfig output;

    /// Throws ConfigError on any invariant violation.
    void validate() const;
};

/// Defaults for a scenario. Values with no measured counterpart
/// (detection efficiency, drift rate, gate width for the dip study, bin sizes)
/// are engineering choices documented in README.md.
ScenarioConfig default_scenario(ScenarioKind kind);

/// Tabular result. CSV-safe: every cell is numeric.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
    std::vector<double> column_values(const std::string& name) const;
};

struct RunRecord {
    ScenarioKind kind = ScenarioKind::stability_run;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string version = version_string;
    Table table;
    /// Per-linewidth FWHM table for dip scans.
    std::optional<Table> fwhm_table;
    /// Wall time per row, seconds; reported in the JSON sidecar only so the CSV
    /// stays byte-reproducible.
    std::vector<double> wall_time_s;
    std::map<std::string, double> summary;
};

struct RunOptions {
    int threads = 1;
    bool quiet = true;
};

RunRecord run_polarization_scan(const ScenarioConfig& cfg, const RunOptions& opts = {});
RunRecord run_intensity_scan(const ScenarioConfig& cfg, const RunOptions& opts = {});
RunRecord run_stability(const ScenarioConfig& cfg, const RunOptions& opts = {});
RunRecord run_dip_scan(const ScenarioConfig& cfg, const RunOptions& opts = {});
RunRecord run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// FWHM of the dip for one linewidth in a dip-scan record, from linear
/// interpolation at half depth. nullopt when the dip is shallower than 3
/// standard errors at its minimum or a half-depth crossing is missing.
std::optional<double> estimate_fwhm(const RunRecord& record, double linewidth_sum_hz);

// Config ingestion (JSON) and emission. See docs/config.md for the schema.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& json_text);
std::string config_to_json(const ScenarioConfig& cfg);
std::string config_hash(const ScenarioConfig& cfg);

std::string to_csv(const Table& table);
std::string summary_json(const RunRecord& record, const ScenarioConfig& cfg);
/// Writes <dir>/<stem>.csv, <dir>/<stem>.json and, for dip scans,
/// <dir>/<stem>_fwhm.csv. Returns the CSV path.
std::string write_outputs(const RunRecord& record, const ScenarioConfig& cfg);

}  // namespace hom
