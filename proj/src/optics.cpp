#include "hom/optics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace hom {

void LaserSpec::validate() const {
    require_config(linewidth_hz > 0.0, "laser linewidth must be > 0");
    require_config(fm_broadening_hz >= 0.0, "laser fm_broadening must be >= 0");
    require_config(mean_photons_per_gate >= 0.0, "laser mean_photons_per_gate must be >= 0");
    require_config(wavelength_nm > 0.0, "laser wavelength must be > 0");
    require_config(is_normalized(sop), "laser sop must be a normalized Jones vector");
}

JonesVectord FieldSample::field() const {
    return amplitude * std::polar(1.0, phase) * sop;
}

FieldSample FieldSample::from_field(const JonesVectord& field) {
    FieldSample out;
    const double n = field.norm();
    out.amplitude = n;
    if (n > 0.0) out.sop = field / n;
    return out;
}

double visibility_from_ratio(double intensity_ratio) {
    require_domain(intensity_ratio >= 0.0, "visibility_from_ratio: R must be >= 0");
    if (std::isinf(intensity_ratio)) return 0.0;
    const double s = intensity_ratio + 1.0;
    return 2.0 * intensity_ratio / (s * s);
}

double visibility_from_counts(double c_dist, double c_ind) {
    require_domain(c_dist > 0.0, "visibility_from_counts: c_dist must be > 0");
    require_domain(c_ind >= 0.0, "visibility_from_counts: c_ind must be >= 0");
    return (c_dist - c_ind) / c_dist;
}

double relative_phase_coherence(double linewidth_sum_hz, double tau_s) {
    require_domain(linewidth_sum_hz >= 0.0, "linewidth sum must be >= 0");
    return std::exp(-std::numbers::pi * linewidth_sum_hz * std::abs(tau_s));
}

double mutual_coherence_sq(double linewidth_sum_hz, double tau_s) {
    require_domain(linewidth_sum_hz >= 0.0, "linewidth sum must be >= 0");
    return std::exp(-2.0 * std::numbers::pi * linewidth_sum_hz * std::abs(tau_s));
}

double coincidence_ratio_analytic(double mu1, double mu2, double eta) {
    require_domain(mu1 >= 0.0 && mu2 >= 0.0, "coincidence_ratio_analytic: mu must be >= 0");
    require_domain(mu1 + mu2 > 0.0, "coincidence_ratio_analytic: both sources off");
    require_domain(eta >= 0.0 && eta <= 1.0, "coincidence_ratio_analytic: eta outside [0,1]");
    const double s = mu1 + mu2;
    return 1.0 - 2.0 * mu1 * mu2 * eta / (s * s);
}

namespace {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 4> gl_x{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                     0.9602898564975363};
constexpr std::array<double, 4> gl_w{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                     0.1012285362903763};

template <typename F>
double gauss_legendre(F&& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < gl_x.size(); ++i) {
        sum += gl_w[i] * (f(mid - half * gl_x[i]) + f(mid + half * gl_x[i]));
    }
    return sum * half;
}

}  // namespace

double gate_overlap_factor(double gate_width_s, double linewidth_sum_hz, double tau_s) {
    require_domain(gate_width_s > 0.0, "gate width must be > 0");
    require_domain(linewidth_sum_hz >= 0.0, "linewidth sum must be >= 0");
    const double w = gate_width_s;
    // G(tau) = (1/W^2) * int_{-W}^{W} (W - |s|) k(s - tau) ds, k = relative-phase coherence.
    auto integrand = [&](double s) {
        return (w - std::abs(s)) * relative_phase_coherence(linewidth_sum_hz, s - tau_s);
    };

    std::vector<double> cuts{-w, 0.0, w};
    if (tau_s > -w && tau_s < w) cuts.push_back(tau_s);
    std::sort(cuts.begin(), cuts.end());

    const double coherence =
        linewidth_sum_hz > 0.0 ? 1.0 / (std::numbers::pi * linewidth_sum_hz) : w;
    const double max_piece = std::min(w, coherence) / 8.0;

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (b <= a) continue;
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / max_piece)));
        const double step = (b - a) / pieces;
        for (int k = 0; k < pieces; ++k) total += gauss_legendre(integrand, a + k * step, a + (k + 1) * step);
    }
    return std::clamp(total / (w * w), 0.0, 1.0);
}

std::vector<DipPoint> dip_profile(double gate_width_s, double linewidth_sum_hz,
                                  std::span<const double> tau_grid, double eta_pol,
                                  double intensity_ratio) {
    require_domain(!tau_grid.empty(), "dip_profile: empty tau grid");
    require_domain(gate_width_s > 0.0, "dip_profile: gate width must be > 0");
    require_domain(eta_pol >= 0.0 && eta_pol <= 1.0, "dip_profile: eta_pol outside [0,1]");
    const double v0 = visibility_from_ratio(intensity_ratio) * eta_pol;
    std::vector<DipPoint> out;
    out.reserve(tau_grid.size());
    for (double tau : tau_grid) {
        out.push_back({tau, 1.0 - v0 * gate_overlap_factor(gate_width_s, linewidth_sum_hz, tau)});
    }
    return out;
}

std::optional<double> half_depth_width(std::span<const double> tau, std::span<const double> ratio,
                                       double min_depth) {
    require_domain(tau.size() == ratio.size() && tau.size() >= 3,
                   "half_depth_width: need >= 3 matching samples");
    const auto min_it = std::min_element(ratio.begin(), ratio.end());
    const auto imin = static_cast<std::size_t>(min_it - ratio.begin());
    const double depth = 1.0 - *min_it;
    if (depth <= 0.0 || depth < min_depth) return std::nullopt;
    const double half = 1.0 - 0.5 * depth;

    auto crossing = [&](std::size_t inner, std::size_t outer) {
        const double t = (half - ratio[inner]) / (ratio[outer] - ratio[inner]);
        return tau[inner] + t * (tau[outer] - tau[inner]);
    };

    std::optional<double> left;
    for (std::size_t i = imin; i > 0; --i) {
        if (ratio[i - 1] >= half) {
            left = crossing(i, i - 1);
            break;
        }
    }
    std::optional<double> right;
    for (std::size_t i = imin; i + 1 < ratio.size(); ++i) {
        if (ratio[i + 1] >= half) {
            right = crossing(i, i + 1);
            break;
        }
    }
    if (!left || !right) return std::nullopt;
    return *right - *left;
}

std::pair<FieldSample, FieldSample> beamsplitter_outputs(const FieldSample& a, const FieldSample& b) {
    const JonesVectord ea = a.field();
    const JonesVectord eb = b.field();
    const double r = std::numbers::sqrt2 / 2.0;
    return {FieldSample::from_field(r * (ea + eb)), FieldSample::from_field(r * (ea - eb))};
}

FieldSample phase_diffusion_step(const FieldSample& state, double dt_s, double linewidth_hz, Rng& rng) {
    require_domain(dt_s > 0.0, "phase_diffusion_step: dt must be > 0");
    require_domain(linewidth_hz >= 0.0, "phase_diffusion_step: linewidth must be >= 0");
    FieldSample next = state;
    if (linewidth_hz == 0.0) return next;
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 * std::numbers::pi * linewidth_hz * dt_s));
    next.phase += normal(rng);
    return next;
}

}  // namespace hom
