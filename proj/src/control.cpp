#include "hom/control.hpp"

#include <algorithm>

namespace hom {

ReferencePair default_references() {
    ReferencePair refs;
    refs[0] = {1545.32, sop::horizontal(), sop::horizontal()};
    refs[1] = {1546.92, sop::diagonal(), sop::diagonal()};
    return refs;
}

void validate_reference_pair(const ReferencePair& refs) {
    constexpr double tol = 1e-6;
    auto independent = [&](const JonesVectord& a, const JonesVectord& b) {
        const double p = overlap_probability(a, b);
        return p > tol && p < 1.0 - tol;
    };
    require_config(independent(refs[0].launched_sop, refs[1].launched_sop),
                   "reference launch states must be neither parallel nor orthogonal");
    require_config(independent(refs[0].target_sop, refs[1].target_sop),
                   "reference target states must be neither parallel nor orthogonal");
}

double wrap_angle(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(a + std::numbers::pi, two_pi);
    if (w <= 0.0) w += two_pi;
    return w - std::numbers::pi;
}

JonesMatrixd CompensatorState::matrix() const {
    const StokesVectord s1 = StokesVectord::UnitX();
    const StokesVectord s3 = StokesVectord::UnitZ();
    return poincare_rotation<double>(s3, angles[3]) * poincare_rotation<double>(s1, angles[2]) *
           poincare_rotation<double>(s3, angles[1]) * poincare_rotation<double>(s1, angles[0]);
}

JonesVectord apply_compensator(const CompensatorState& comp, const JonesVectord& s) {
    return rotate(comp.matrix(), s);
}

double error_signal(const JonesMatrixd& link_birefringence, const CompensatorState& comp,
                    const ReferencePair& refs) {
    validate_reference_pair(refs);
    const JonesMatrixd path = comp.matrix() * link_birefringence;
    double err = 0.0;
    for (const auto& r : refs) err += 1.0 - overlap_probability(rotate(path, r.launched_sop), r.target_sop);
    return std::max(err, 0.0);
}

double error_signal(const FiberLink& link, double quantum_wavelength_nm, const CompensatorState& comp,
                    const ReferencePair& refs) {
    validate_reference_pair(refs);
    const JonesMatrixd c = comp.matrix();
    double err = 0.0;
    for (const auto& r : refs) {
        const JonesMatrixd path = c * link.birefringence_at(r.wavelength_nm - quantum_wavelength_nm);
        err += 1.0 - overlap_probability(rotate(path, r.launched_sop), r.target_sop);
    }
    return std::max(err, 0.0);
}

double measured_error(const ControlledLink& cl, const CompensatorState& comp, Rng& control_rng) {
    double err = error_signal(cl.link, cl.quantum_wavelength_nm, comp, cl.references);
    if (cl.measurement_noise > 0.0) {
        std::normal_distribution<double> noise(0.0, cl.measurement_noise);
        err += noise(control_rng) + noise(control_rng);
    }
    return err;
}

void advance(ControlledLink& cl, double period_s, double level, bool control_on, Rng& drift_rng,
             Rng& control_rng) {
    drift(cl.link, period_s, level, drift_rng);
    if (!control_on) return;
    cl.compensator = control_step(
        cl.compensator, [&](const CompensatorState& c) { return measured_error(cl, c, control_rng); },
        control_rng);
}

double quantum_overlap(const ControlledLink& cl, const JonesVectord& sop) {
    return overlap_probability(sop, rotate(cl.quantum_path(), sop));
}

}  // namespace hom
