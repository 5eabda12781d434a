#pragma once

// Fiber link: loss, propagation delay and a stochastic birefringence drift.

#include <utility>
#include <vector>

#include "hom/polarization.hpp"
#include "hom/random.hpp"

namespace hom {

struct FiberLink {
    double length_km = 8.5;
    double attenuation_db_per_km = 0.2;
    JonesMatrixd birefringence = JonesMatrixd::Identity();
    /// RMS Poincare rotation per sqrt(second) at perturbation level 1.
    double drift_rate = 0.05;
    double group_index = 1.468;
    /// First-order differential rotation (rad/nm, about s1) between the
    /// quantum channel and a channel detuned from it. 0 disables it.
    double differential_rotation_per_nm = 0.0;

    double transmission() const;
    double delay_s() const;
    /// Transformation seen by light `offset_nm` away from the quantum channel.
    JonesMatrixd birefringence_at(double offset_nm) const;
    void validate() const;
};

/// Piecewise-constant multiplier on drift_rate. Each segment holds from its
/// start time until the next one; times before the first segment use it too.
class PerturbationSchedule {
public:
    struct Segment {
        double start_s;
        double level;
    };

    PerturbationSchedule() : segments_{{0.0, 1.0}} {}
    explicit PerturbationSchedule(std::vector<Segment> segments);

    static PerturbationSchedule constant(double level) { return PerturbationSchedule({{0.0, level}}); }

    double level_at(double t_s) const;
    const std::vector<Segment>& segments() const { return segments_; }

private:
    std::vector<Segment> segments_;
};

/// Composes the birefringence with random_unitary(drift_rate * level * sqrt(dt))
/// and projects back onto the unitary group.
FiberLink drift_step(const FiberLink& link, double dt_s, double level, Rng& rng);

/// In-place form of drift_step for simulation loops.
void drift(FiberLink& link, double dt_s, double level, Rng& rng);

struct Propagated {
    JonesVectord sop;
    double mean_photons;
};

Propagated propagate(const FiberLink& link, const JonesVectord& sop, double mean_photons);

}  // namespace hom
