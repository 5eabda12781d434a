#include "hom/detection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace hom {

void DetectorSpec::validate() const {
    require_config(efficiency >= 0.0 && efficiency <= 1.0, "detector efficiency must be in [0,1]");
    require_config(dark_count_prob >= 0.0 && dark_count_prob < 1.0, "dark count probability must be in [0,1)");
    require_config(gate_width_s > 0.0, "detector gate width must be > 0");
}

void TriggerScheme::validate() const {
    require_config(delay_line_s > 0.0, "trigger delay line must be > 0");
}

double click_probability(double intensity, const DetectorSpec& spec) {
    require_domain(intensity >= 0.0, "click_probability: intensity must be >= 0");
    return 1.0 - (1.0 - spec.dark_count_prob) * std::exp(-spec.efficiency * intensity);
}

bool sample_click(double intensity, const DetectorSpec& spec, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < click_probability(intensity, spec);
}

BeamsplitterInputs beamsplitter_inputs(std::span<const LaserSpec, 2> lasers, std::span<const FiberLink, 2> links,
                                       std::span<const CompensatorState, 2> compensators) {
    BeamsplitterInputs in;
    std::array<JonesVectord, 2> fields;
    for (std::size_t i = 0; i < 2; ++i) {
        const Propagated p = propagate(links[i], lasers[i].sop, lasers[i].mean_photons_per_gate);
        fields[i] = std::sqrt(p.mean_photons) * apply_compensator(compensators[i], p.sop);
    }
    in.field_a = fields[0];
    in.field_b = fields[1];
    in.linewidth_sum_hz = lasers[0].effective_linewidth_hz() + lasers[1].effective_linewidth_hz();
    return in;
}

int slices_per_gate(double gate_width_s, double linewidth_sum_hz, int slices_per_coherence) {
    require_domain(gate_width_s > 0.0 && slices_per_coherence > 0, "slices_per_gate: bad arguments");
    const double coherence = linewidth_sum_hz > 0.0 ? 1.0 / (std::numbers::pi * linewidth_sum_hz)
                                                    : std::numeric_limits<double>::infinity();
    const double resolved = std::min(gate_width_s, coherence);
    return static_cast<int>(std::ceil(slices_per_coherence * gate_width_s / resolved - 1e-9));
}

namespace {

struct Slice {
    double phase_sigma;  // std. dev. of the phase step from the previous slice
    double weight1;      // fraction of gate 1 covered, 0 if outside
    double weight2;
};

// Slices cover gate 1 = [0, W1] and gate 2 = [tau, tau + W2]; gaps between
// them are crossed by a single exact Wiener increment.
std::vector<Slice> build_slices(double w1, double w2, double tau, double linewidth_sum, int per_coherence) {
    const double coherence = linewidth_sum > 0.0 ? 1.0 / (std::numbers::pi * linewidth_sum)
                                                 : std::numeric_limits<double>::infinity();
    const double h = std::min({w1, w2, coherence}) / per_coherence;

    std::vector<double> cuts{0.0, w1, tau, tau + w2};
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<Slice> slices;
    double prev_mid = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        const bool in1 = a >= 0.0 && b <= w1;
        const bool in2 = a >= tau && b <= tau + w2;
        if (!in1 && !in2) continue;
        const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h - 1e-9)));
        const double dt = (b - a) / n;
        for (int k = 0; k < n; ++k) {
            const double mid = a + (k + 0.5) * dt;
            const double sigma =
                std::isnan(prev_mid) ? 0.0 : std::sqrt(2.0 * std::numbers::pi * linewidth_sum * (mid - prev_mid));
            slices.push_back({sigma, in1 ? dt / w1 : 0.0, in2 ? dt / w2 : 0.0});
            prev_mid = mid;
        }
    }
    return slices;
}

struct Sums {
    double x = 0.0;  // SPD1 click (or probability)
    double y = 0.0;  // SPD1 and SPD2 click
    double f = 0.0;  // SPD2 click regardless of SPD1
    double xx = 0.0;
    double yy = 0.0;
    double xy = 0.0;

    void add(const Sums& o) {
        x += o.x;
        y += o.y;
        f += o.f;
        xx += o.xx;
        yy += o.yy;
        xy += o.xy;
    }
};

struct BlockKernel {
    std::vector<Slice> slices;
    double half_total = 0.0;
    double zr = 0.0;
    double zi = 0.0;
    DetectorSpec spd1;
    DetectorSpec spd2;
    TallyMode mode = TallyMode::expected;

    Sums run(std::int64_t gates, Rng& rng) const {
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        std::normal_distribution<double> normal(0.0, 1.0);
        Sums s;
        for (std::int64_t g = 0; g < gates; ++g) {
            double phase = 2.0 * std::numbers::pi * uniform(rng);
            double photons1 = 0.0;
            double photons2 = 0.0;
            for (const Slice& sl : slices) {
                if (sl.phase_sigma > 0.0) phase += sl.phase_sigma * normal(rng);
                const double beat = zr * std::cos(phase) - zi * std::sin(phase);
                photons1 += sl.weight1 * (half_total + beat);
                photons2 += sl.weight2 * (half_total - beat);
            }
            const double p1 = click_probability(std::max(photons1, 0.0), spd1);
            const double p2 = click_probability(std::max(photons2, 0.0), spd2);
            double x = p1;
            double y = p1 * p2;
            double f = p2;
            if (mode == TallyMode::sampled) {
                const bool c1 = uniform(rng) < p1;
                const bool c2 = uniform(rng) < p2;
                x = c1 ? 1.0 : 0.0;
                f = c2 ? 1.0 : 0.0;
                y = x * f;
            }
            s.x += x;
            s.y += y;
            s.f += f;
            s.xx += x * x;
            s.yy += y * y;
            s.xy += x * y;
        }
        return s;
    }
};

constexpr std::int64_t chunk_gates = 16384;

}  // namespace

CoincidenceTally run_coincidence_block(const BeamsplitterInputs& inputs, const BlockOptions& options,
                                       std::int64_t n_gates, Rng& rng) {
    require_domain(n_gates > 0, "run_coincidence_block: n_gates must be > 0");
    for (const auto& d : options.detectors) d.validate();
    options.trigger.validate();

    BlockKernel kernel;
    kernel.spd1 = options.detectors[0];
    kernel.spd2 = options.detectors[1];
    kernel.mode = options.mode;
    kernel.half_total = 0.5 * (inputs.field_a.squaredNorm() + inputs.field_b.squaredNorm());
    const std::complex<double> z = inputs.field_a.dot(inputs.field_b);
    kernel.zr = z.real();
    kernel.zi = z.imag();
    kernel.slices = build_slices(options.detectors[0].gate_width_s, options.detectors[1].gate_width_s,
                                 options.trigger.gate_delay_offset_s, inputs.linewidth_sum_hz,
                                 options.slices_per_coherence);

    const std::uint64_t block_seed = rng();
    const std::int64_t chunks = (n_gates + chunk_gates - 1) / chunk_gates;
    std::vector<Sums> partial(static_cast<std::size_t>(chunks));

    auto run_chunk = [&](std::int64_t c) {
        Rng chunk_rng = make_stream(block_seed, static_cast<std::uint64_t>(c));
        const std::int64_t gates = std::min(chunk_gates, n_gates - c * chunk_gates);
        partial[static_cast<std::size_t>(c)] = kernel.run(gates, chunk_rng);
    };

    const int workers = static_cast<int>(std::clamp<std::int64_t>(options.threads, 1, chunks));
    if (workers == 1) {
        for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::atomic<std::int64_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::int64_t c = next++; c < chunks; c = next++) run_chunk(c);
            });
        }
    }

    Sums total;
    for (const auto& p : partial) total.add(p);

    CoincidenceTally tally;
    tally.gates = n_gates;
    tally.n1 = total.x;
    tally.n2 = total.y;
    tally.n2_free = total.f;
    if (total.x <= 0.0) throw InsufficientStatistics("no SPD1 clicks in block", tally);

    tally.ratio = total.y / total.x;
    const double r = tally.ratio;
    const double residual = std::max(total.yy - 2.0 * r * total.xy + r * r * total.xx, 0.0);
    const double n = static_cast<double>(n_gates);
    tally.ratio_stderr = n > 1.0 ? std::sqrt(residual * n / (n - 1.0)) / total.x : 0.0;
    return tally;
}

CoincidenceTally run_coincidence_block(std::span<const LaserSpec, 2> lasers, std::span<const FiberLink, 2> links,
                                       std::span<const CompensatorState, 2> compensators,
                                       const BlockOptions& options, std::int64_t n_gates, Rng& rng) {
    return run_coincidence_block(beamsplitter_inputs(lasers, links, compensators), options, n_gates, rng);
}

namespace {

double ratio_of_ratios_stderr(double num, double num_se, double den, double den_se) {
    if (num == 0.0) return num_se / den;
    const double q = num / den;
    return std::abs(q) * std::hypot(num_se / num, den_se / den);
}

}  // namespace

DelayScan scan_gate_delay(const std::function<BeamsplitterInputs()>& inputs, const BlockOptions& options,
                          std::span<const double> tau_grid, double baseline_tau_s, std::int64_t n_gates, Rng& rng,
                          const std::function<void(std::size_t)>& before_block) {
    require_domain(!tau_grid.empty(), "scan_gate_delay: empty tau grid");
    DelayScan scan;
    scan.baseline_tau_s = baseline_tau_s;
    BlockOptions opts = options;
    for (std::size_t i = 0; i <= tau_grid.size(); ++i) {
        if (before_block) before_block(i);
        const bool is_baseline = i == tau_grid.size();
        opts.trigger.gate_delay_offset_s = is_baseline ? baseline_tau_s : tau_grid[i];
        const CoincidenceTally t = run_coincidence_block(inputs(), opts, n_gates, rng);
        if (is_baseline) {
            scan.baseline = t;
        } else {
            scan.points.push_back({tau_grid[i], t});
        }
    }
    const auto& b = scan.baseline;
    if (b.ratio <= 0.0) throw StatisticsError("scan_gate_delay: zero baseline coincidence ratio");
    for (auto& p : scan.points) {
        p.normalized = p.tally.ratio / b.ratio;
        p.normalized_stderr = ratio_of_ratios_stderr(p.tally.ratio, p.tally.ratio_stderr, b.ratio, b.ratio_stderr);
    }
    return scan;
}

VisibilityEstimate visibility_estimate(const CoincidenceTally& matched, const CoincidenceTally& detuned) {
    VisibilityEstimate v;
    v.value = visibility_from_counts(detuned.ratio, matched.ratio);
    v.std_error = ratio_of_ratios_stderr(matched.ratio, matched.ratio_stderr, detuned.ratio, detuned.ratio_stderr);
    return v;
}

}  // namespace hom
