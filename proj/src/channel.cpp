#include "hom/channel.hpp"

#include <algorithm>
#include <cmath>

namespace hom {

namespace {
constexpr double speed_of_light_km_per_s = 299792.458;
}

double FiberLink::transmission() const {
    return std::pow(10.0, -attenuation_db_per_km * length_km / 10.0);
}

double FiberLink::delay_s() const { return length_km * group_index / speed_of_light_km_per_s; }

JonesMatrixd FiberLink::birefringence_at(double offset_nm) const {
    if (differential_rotation_per_nm == 0.0 || offset_nm == 0.0) return birefringence;
    return poincare_rotation<double>(StokesVectord::UnitX(), differential_rotation_per_nm * offset_nm) *
           birefringence;
}

void FiberLink::validate() const {
    require_config(length_km > 0.0, "fiber length must be > 0");
    require_config(attenuation_db_per_km >= 0.0, "fiber attenuation must be >= 0");
    require_config(drift_rate >= 0.0, "fiber drift_rate must be >= 0");
    require_config(group_index >= 1.0, "fiber group index must be >= 1");
    require_config(is_unitary(birefringence, 1e-8), "fiber birefringence must be unitary");
}

PerturbationSchedule::PerturbationSchedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
    require_config(!segments_.empty(), "perturbation schedule needs at least one segment");
    std::stable_sort(segments_.begin(), segments_.end(),
                     [](const Segment& a, const Segment& b) { return a.start_s < b.start_s; });
    for (const auto& s : segments_) require_config(s.level >= 0.0, "perturbation level must be >= 0");
}

double PerturbationSchedule::level_at(double t_s) const {
    double level = segments_.front().level;
    for (const auto& s : segments_) {
        if (s.start_s > t_s) break;
        level = s.level;
    }
    return level;
}

void drift(FiberLink& link, double dt_s, double level, Rng& rng) {
    require_domain(dt_s > 0.0, "drift_step: dt must be > 0");
    require_domain(level >= 0.0, "drift_step: level must be >= 0");
    const double scale = link.drift_rate * level * std::sqrt(dt_s);
    if (scale == 0.0) return;
    link.birefringence = reunitarize<double>(random_unitary<double>(rng, scale) * link.birefringence);
}

FiberLink drift_step(const FiberLink& link, double dt_s, double level, Rng& rng) {
    FiberLink next = link;
    drift(next, dt_s, level, rng);
    return next;
}

Propagated propagate(const FiberLink& link, const JonesVectord& sop, double mean_photons) {
    require_domain(mean_photons >= 0.0, "propagate: mean photon number must be >= 0");
    return {rotate(link.birefringence, sop), mean_photons * link.transmission()};
}

}  // namespace hom
