#pragma once

// Full polarization control of one link from two reference wavelengths.
//
// The compensator sits at the receiving end and is a cascade of four
// rotations about alternating s1/s3 Poincare axes (fiber-squeezer style).
// Its angles are servoed by simultaneous-perturbation stochastic gradient
// descent (SPGD) on the summed reference infidelity. Restoring two
// non-orthogonal, non-parallel reference states pins the whole link
// transformation to the identity up to global phase, which restores every
// other state sent down the fiber as well.

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <span>

#include "hom/channel.hpp"
#include "hom/polarization.hpp"
#include "hom/random.hpp"

namespace hom {

struct ReferenceChannel {
    double wavelength_nm = 1545.32;
    JonesVectord launched_sop = sop::horizontal();
    JonesVectord target_sop = sop::horizontal();
};

using ReferencePair = std::array<ReferenceChannel, 2>;

/// Reference lasers at 1545.32 nm (H) and 1546.92 nm (D), each held at its
/// launched state.
ReferencePair default_references();

/// Throws ConfigError unless both the launched and target pairs are neither
/// parallel nor orthogonal.
void validate_reference_pair(const ReferencePair& refs);

struct CompensatorState {
    std::array<double, 4> angles{};
    double gain = 0.3;
    double dither_amplitude = 0.05;

    /// R_s3(a3) R_s1(a2) R_s3(a1) R_s1(a0).
    JonesMatrixd matrix() const;
};

double wrap_angle(double a);

JonesVectord apply_compensator(const CompensatorState& comp, const JonesVectord& s);

/// Sum over the references of 1 - |<target| comp * link * launched>|^2.
double error_signal(const JonesMatrixd& link_birefringence, const CompensatorState& comp,
                    const ReferencePair& refs);

/// Wavelength-aware form: each reference sees the link at its own detuning
/// from `quantum_wavelength_nm`.
double error_signal(const FiberLink& link, double quantum_wavelength_nm, const CompensatorState& comp,
                    const ReferencePair& refs);

/// One SPGD iteration: probe the error at angles +/- a random sign pattern of
/// dither amplitude, then step against the two-sided gradient estimate.
/// Costs exactly two evaluations of `error_fn`.
template <typename ErrorFn>
CompensatorState control_step(const CompensatorState& comp, ErrorFn&& error_fn, Rng& rng) {
    require_domain(comp.dither_amplitude > 0.0 && comp.gain > 0.0,
                   "control_step: gain and dither must be > 0");
    std::bernoulli_distribution coin(0.5);
    std::array<double, 4> sign{};
    for (auto& s : sign) s = coin(rng) ? 1.0 : -1.0;

    CompensatorState plus = comp;
    CompensatorState minus = comp;
    for (std::size_t i = 0; i < sign.size(); ++i) {
        plus.angles[i] += comp.dither_amplitude * sign[i];
        minus.angles[i] -= comp.dither_amplitude * sign[i];
    }
    const double delta = error_fn(plus) - error_fn(minus);

    CompensatorState next = comp;
    const double scale = comp.gain * delta / (2.0 * comp.dither_amplitude);
    for (std::size_t i = 0; i < sign.size(); ++i) {
        next.angles[i] = wrap_angle(comp.angles[i] - scale * sign[i]);
    }
    return next;
}

/// A fiber link with its receiver-side compensator and reference lasers.
struct ControlledLink {
    FiberLink link;
    CompensatorState compensator;
    ReferencePair references = default_references();
    double quantum_wavelength_nm = 1546.12;
    /// Std. dev. of additive Gaussian noise on each reference overlap reading.
    double measurement_noise = 0.0;

    /// Transformation from launch to beamsplitter for the quantum channel.
    JonesMatrixd quantum_path() const { return compensator.matrix() * link.birefringence; }
};

/// Reference-channel error as read by the controller (includes measurement noise).
double measured_error(const ControlledLink& cl, const CompensatorState& comp, Rng& control_rng);

/// Advances one control period: the link drifts (drift_rng only) and, when
/// enabled, the compensator takes one SPGD step (control_rng only). With
/// control disabled the drift sequence is identical to bare drift().
void advance(ControlledLink& cl, double period_s, double level, bool control_on, Rng& drift_rng,
             Rng& control_rng);

/// |<sop| quantum_path * sop>|^2: how well the quantum channel is held.
double quantum_overlap(const ControlledLink& cl, const JonesVectord& sop);

}  // namespace hom
