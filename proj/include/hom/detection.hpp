#pragma once

// Gated threshold detectors in the triggered coincidence scheme: every
// SPD1 click arms an SPD2 gate offset by the scanned delay tau, and the
// coincidence ratio is SPD2 clicks per SPD1 click.
//
// A block simulates independent gate periods. In each one the relative phase
// of the two lasers starts uniformly random (the trigger period is long
// against the coherence time) and then diffuses across the union of the two
// gate windows, sliced finely enough to resolve the diffusion. The photon
// number each detector sees is the gate-integrated port intensity; clicks
// follow the Poissonian threshold law.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hom/control.hpp"
#include "hom/errors.hpp"
#include "hom/optics.hpp"
#include "hom/random.hpp"

namespace hom {

struct DetectorSpec {
    double efficiency = 0.1;
    double dark_count_prob = 0.0;  ///< per gate
    double gate_width_s = 1e-9;
    // Dead time and afterpulsing are not modeled.

    void validate() const;
};

struct TriggerScheme {
    /// Optical delay before SPD2; must exceed the trigger latency (~100 m of fiber).
    double delay_line_s = 490e-9;
    /// Scanned offset tau of the SPD2 gate relative to the matched position.
    double gate_delay_offset_s = 0.0;

    void validate() const;
};

/// How a block turns simulated intensities into tallies.
enum class TallyMode {
    /// Bernoulli clicks; n1, n2 are integer counts.
    sampled,
    /// Click probabilities given the simulated fields are accumulated
    /// instead of sampled (conditional-expectation estimator). Same mean as
    /// `sampled`, without detector shot noise.
    expected,
};

struct CoincidenceTally {
    std::int64_t gates = 0;
    double n1 = 0.0;       ///< SPD1 clicks
    double n2 = 0.0;       ///< SPD2 clicks on triggered gates
    double n2_free = 0.0;  ///< SPD2 clicks had it been gated every period
    double ratio = 0.0;    ///< n2 / n1
    double ratio_stderr = 0.0;

    double joint_rate() const { return gates > 0 ? n2 / static_cast<double>(gates) : 0.0; }
    double free_rate() const { return gates > 0 ? n2_free / static_cast<double>(gates) : 0.0; }
};

class InsufficientStatistics : public StatisticsError {
public:
    InsufficientStatistics(const std::string& what, CoincidenceTally partial)
        : StatisticsError(what), partial_(partial) {}
    const CoincidenceTally& partial() const { return partial_; }

private:
    CoincidenceTally partial_;
};

/// 1 - (1 - dark) exp(-efficiency * intensity).
double click_probability(double intensity, const DetectorSpec& spec);

bool sample_click(double intensity, const DetectorSpec& spec, Rng& rng);

struct BlockOptions {
    std::array<DetectorSpec, 2> detectors{};
    TriggerScheme trigger{};
    TallyMode mode = TallyMode::expected;
    int slices_per_coherence = 16;
    int threads = 1;
};

/// Both beamsplitter inputs for one block: Jones field with |field|^2 the mean
/// photon number per gate, and the summed effective linewidth.
struct BeamsplitterInputs {
    JonesVectord field_a = JonesVectord::Zero();
    JonesVectord field_b = JonesVectord::Zero();
    double linewidth_sum_hz = 0.0;
};

BeamsplitterInputs beamsplitter_inputs(std::span<const LaserSpec, 2> lasers,
                                       std::span<const FiberLink, 2> links,
                                       std::span<const CompensatorState, 2> compensators);

/// Slice count per gate for the given gate width and linewidth sum.
int slices_per_gate(double gate_width_s, double linewidth_sum_hz, int slices_per_coherence);

/// Simulates n_gates trigger periods. Draws exactly one value from `rng`; the
/// per-chunk streams derived from it make the result independent of
/// `options.threads`. Throws InsufficientStatistics when SPD1 never clicks.
CoincidenceTally run_coincidence_block(const BeamsplitterInputs& inputs, const BlockOptions& options,
                                       std::int64_t n_gates, Rng& rng);

CoincidenceTally run_coincidence_block(std::span<const LaserSpec, 2> lasers,
                                       std::span<const FiberLink, 2> links,
                                       std::span<const CompensatorState, 2> compensators,
                                       const BlockOptions& options, std::int64_t n_gates, Rng& rng);

struct DelayScanPoint {
    double tau_s;
    CoincidenceTally tally;
    double normalized = 0.0;  ///< ratio / baseline ratio
    double normalized_stderr = 0.0;
};

struct DelayScan {
    std::vector<DelayScanPoint> points;
    CoincidenceTally baseline;
    double baseline_tau_s = 1e-6;
};

/// One block per tau, then one at `baseline_tau_s`, all normalized to the
/// baseline. `before_block(i)` runs before the i-th block (the baseline is
/// last) and may advance shared drift/controller state read through `inputs`.
DelayScan scan_gate_delay(const std::function<BeamsplitterInputs()>& inputs, const BlockOptions& options,
                          std::span<const double> tau_grid, double baseline_tau_s, std::int64_t n_gates,
                          Rng& rng, const std::function<void(std::size_t)>& before_block = {});

/// Visibility 1 - matched/detuned with delta-method standard error.
struct VisibilityEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

VisibilityEstimate visibility_estimate(const CoincidenceTally& matched, const CoincidenceTally& detuned);

}  // namespace hom
