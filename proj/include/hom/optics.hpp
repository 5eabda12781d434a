#pragma once

// Weak-coherent-state sources, the 50/50 beamsplitter and closed-form
// predictors for two-source bunching visibility and the gate-delay dip.

#include <complex>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "hom/polarization.hpp"
#include "hom/random.hpp"

namespace hom {

/// CW laser after its attenuator. Linewidths are Lorentzian FWHM in Hz;
/// FM broadening adds to the effective Lorentzian width.
struct LaserSpec {
    double wavelength_nm = 1546.12;
    double linewidth_hz = 1e6;
    double fm_broadening_hz = 0.0;
    double mean_photons_per_gate = 1.0;
    JonesVectord sop = sop::horizontal();

    double effective_linewidth_hz() const { return linewidth_hz + fm_broadening_hz; }
    void validate() const;
};

/// Semiclassical field in one gate slice: |amplitude|^2 is the mean photon
/// number it carries, `phase` the accumulated laser phase.
struct FieldSample {
    std::complex<double> amplitude{0.0, 0.0};
    double phase = 0.0;
    JonesVectord sop = sop::horizontal();

    double intensity() const { return std::norm(amplitude); }
    /// Full Jones field amplitude * exp(i phase) * sop.
    JonesVectord field() const;
    static FieldSample from_field(const JonesVectord& field);
};

/// Distinguishability of the two photons at the beamsplitter.
struct OverlapFactors {
    double polarization = 1.0;
    double temporal = 1.0;

    double eta() const { return polarization * temporal; }
};

/// 2R/(R+1)^2 for intensity ratio R = mu2/mu1.
double visibility_from_ratio(double intensity_ratio);

/// (C_dist - C_ind) / C_dist.
double visibility_from_counts(double c_dist, double c_ind);

/// |gamma_12(tau)|: coherence of the relative phase of two independent
/// Lorentzian lasers whose linewidths sum to `linewidth_sum`.
double relative_phase_coherence(double linewidth_sum_hz, double tau_s);

/// |gamma_12(tau)|^2 = exp(-2 pi linewidth_sum |tau|).
double mutual_coherence_sq(double linewidth_sum_hz, double tau_s);

/// C_ind/C_dist = 1 - 2 mu1 mu2 eta / (mu1 + mu2)^2.
double coincidence_ratio_analytic(double mu1, double mu2, double eta);

/// Normalized cross-correlation of two rectangular gates of width `gate_width`
/// offset by `tau`, weighted by the relative-phase coherence. Equals the
/// temporal overlap factor entering the dip depth at delay tau.
double gate_overlap_factor(double gate_width_s, double linewidth_sum_hz, double tau_s);

struct DipPoint {
    double tau_s;
    double ratio;
};

/// Normalized coincidence ratio C(tau)/C_dist = 1 - V0 G(tau) with
/// V0 = 2 R eta_pol / (R+1)^2.
std::vector<DipPoint> dip_profile(double gate_width_s, double linewidth_sum_hz,
                                  std::span<const double> tau_grid, double eta_pol,
                                  double intensity_ratio);

/// Full width at half depth of a dip sampled at ascending `tau` with baseline 1.
/// Crossings are found by linear interpolation. Returns nullopt when the dip is
/// not resolved: depth below `min_depth`, or no half-depth crossing on a side.
std::optional<double> half_depth_width(std::span<const double> tau, std::span<const double> ratio,
                                       double min_depth = 0.0);

/// Lossless 50/50 beamsplitter: c = (a + b)/sqrt2, d = (a - b)/sqrt2 per
/// polarization component.
std::pair<FieldSample, FieldSample> beamsplitter_outputs(const FieldSample& a, const FieldSample& b);

/// Advances the phase by a zero-mean Gaussian of variance 2 pi linewidth dt.
FieldSample phase_diffusion_step(const FieldSample& state, double dt_s, double linewidth_hz, Rng& rng);

}  // namespace hom
