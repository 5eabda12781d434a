#pragma once

// Jones-calculus polarization algebra.
//
// Stokes convention: H -> (1,0,0), D -> (0,1,0), RCP = (1, i)/sqrt(2) -> (0,0,1),
// i.e. s_k = <psi|sigma_k|psi> with sigma_1 = diag(1,-1), sigma_2 = Pauli-x,
// sigma_3 = Pauli-y. A rotation by angle a about unit Stokes axis n acts on
// Jones vectors as exp(-i a/2 n.sigma).
//
// Global phase carries no meaning: every contract below is phrased through
// moduli of inner products.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "hom/errors.hpp"

namespace hom {

template <typename Scalar = double>
using JonesVector = Eigen::Matrix<std::complex<Scalar>, 2, 1>;

template <typename Scalar = double>
using JonesMatrix = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

template <typename Scalar = double>
using StokesVector = Eigen::Matrix<Scalar, 3, 1>;

using JonesVectord = JonesVector<double>;
using JonesMatrixd = JonesMatrix<double>;
using StokesVectord = StokesVector<double>;

namespace sop {

template <typename Scalar = double>
JonesVector<Scalar> horizontal() {
    return {Scalar(1), Scalar(0)};
}

template <typename Scalar = double>
JonesVector<Scalar> vertical() {
    return {Scalar(0), Scalar(1)};
}

template <typename Scalar = double>
JonesVector<Scalar> diagonal() {
    const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
    return {r, r};
}

template <typename Scalar = double>
JonesVector<Scalar> antidiagonal() {
    const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
    return {r, -r};
}

template <typename Scalar = double>
JonesVector<Scalar> right_circular() {
    const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
    return {std::complex<Scalar>(r, 0), std::complex<Scalar>(0, r)};
}

template <typename Scalar = double>
JonesVector<Scalar> left_circular() {
    const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
    return {std::complex<Scalar>(r, 0), std::complex<Scalar>(0, -r)};
}

/// Linear polarization at Jones-space angle `theta` from horizontal.
/// overlap_probability(horizontal(), linear(theta)) == cos^2(theta).
template <typename Scalar = double>
JonesVector<Scalar> linear(Scalar theta) {
    return {std::cos(theta), std::sin(theta)};
}

}  // namespace sop

template <typename Scalar>
bool is_normalized(const JonesVector<Scalar>& s, Scalar tol = Scalar(1e-6)) {
    return std::abs(s.squaredNorm() - Scalar(1)) <= tol;
}

template <typename Scalar>
JonesVector<Scalar> normalized(const JonesVector<Scalar>& s) {
    const Scalar n = s.norm();
    require_domain(n > Scalar(0), "cannot normalize a zero Jones vector");
    return s / n;
}

/// |<a|b>|^2 for two normalized states.
template <typename Scalar>
Scalar overlap_probability(const JonesVector<Scalar>& a, const JonesVector<Scalar>& b) {
    require_domain(is_normalized(a) && is_normalized(b),
                   "overlap_probability: Jones vector is not normalized");
    const Scalar p = std::norm(a.dot(b));
    return std::clamp(p, Scalar(0), Scalar(1));
}

template <typename Scalar>
bool is_unitary(const JonesMatrix<Scalar>& m, Scalar tol = Scalar(1e-10)) {
    return (m.adjoint() * m - JonesMatrix<Scalar>::Identity()).norm() <= tol;
}

template <typename Scalar>
JonesVector<Scalar> rotate(const JonesMatrix<Scalar>& m, const JonesVector<Scalar>& s) {
    return normalized<Scalar>(m * s);
}

/// Transformation that applies `second` after `first`.
template <typename Scalar>
JonesMatrix<Scalar> compose(const JonesMatrix<Scalar>& second, const JonesMatrix<Scalar>& first) {
    return second * first;
}

template <typename Scalar>
JonesMatrix<Scalar> inverse(const JonesMatrix<Scalar>& m) {
    return m.adjoint();
}

/// Nearest unitary in Frobenius norm (polar factor).
template <typename Scalar>
JonesMatrix<Scalar> reunitarize(const JonesMatrix<Scalar>& m) {
    Eigen::JacobiSVD<JonesMatrix<Scalar>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

/// Rotation of the Poincare sphere by `angle` about the unit Stokes axis `axis`.
template <typename Scalar>
JonesMatrix<Scalar> poincare_rotation(const StokesVector<Scalar>& axis, Scalar angle) {
    using C = std::complex<Scalar>;
    const Scalar c = std::cos(angle / 2);
    const Scalar s = std::sin(angle / 2);
    const C i(0, 1);
    // c*I - i*s*(n1*sigma1 + n2*sigma2 + n3*sigma3)
    JonesMatrix<Scalar> u;
    u(0, 0) = C(c, 0) - i * s * axis(0);
    u(1, 1) = C(c, 0) + i * s * axis(0);
    u(0, 1) = -i * s * axis(1) - s * axis(2);
    u(1, 0) = -i * s * axis(1) + s * axis(2);
    return u;
}

/// Net Poincare-sphere rotation angle of a unitary, in [0, pi].
template <typename Scalar>
Scalar rotation_angle(const JonesMatrix<Scalar>& m) {
    const Scalar half_trace = std::abs(m.trace()) / (2 * std::sqrt(std::abs(m.determinant())));
    return 2 * std::acos(std::clamp(half_trace, Scalar(0), Scalar(1)));
}

template <typename Scalar>
StokesVector<Scalar> to_stokes(const JonesVector<Scalar>& s) {
    const auto hv = std::conj(s(0)) * s(1);
    return {std::norm(s(0)) - std::norm(s(1)), 2 * hv.real(), 2 * hv.imag()};
}

/// A Jones vector whose Stokes vector is `st` (unit length). Phase chosen with real h.
template <typename Scalar>
JonesVector<Scalar> from_stokes(const StokesVector<Scalar>& st) {
    const StokesVector<Scalar> n = st.normalized();
    const Scalar polar = std::acos(std::clamp(n(0), Scalar(-1), Scalar(1)));
    const Scalar azimuth = std::atan2(n(2), n(1));
    return {std::complex<Scalar>(std::cos(polar / 2), 0),
            std::polar(std::sin(polar / 2), azimuth)};
}

/// Random polarization transformation: an isotropic Brownian increment on the
/// rotation group of the Poincare sphere whose net rotation angle has RMS
/// `scale` in the small-angle regime. Each substep is a rotation by a
/// zero-mean Gaussian angle about a uniformly random axis; large scales are
/// split into substeps of RMS <= 0.25 rad so that composing draws of scale
/// a and b is equal in law to one draw of scale sqrt(a^2 + b^2).
template <typename Scalar, typename Urbg>
JonesMatrix<Scalar> random_unitary(Urbg& rng, Scalar scale) {
    require_domain(scale >= Scalar(0), "random_unitary: negative scale");
    JonesMatrix<Scalar> u = JonesMatrix<Scalar>::Identity();
    if (scale == Scalar(0)) return u;

    constexpr Scalar max_substep = Scalar(0.25);
    const auto substeps = static_cast<int>(std::ceil((scale / max_substep) * (scale / max_substep)));
    const Scalar component_sigma = scale / std::sqrt(Scalar(3) * substeps);
    std::normal_distribution<Scalar> normal(Scalar(0), component_sigma);
    for (int k = 0; k < substeps; ++k) {
        StokesVector<Scalar> omega(normal(rng), normal(rng), normal(rng));
        const Scalar angle = omega.norm();
        if (angle == Scalar(0)) continue;
        u = poincare_rotation<Scalar>(omega / angle, angle) * u;
    }
    return u;
}

/// Haar-distributed polarization transformation (uniform over SU(2)).
template <typename Scalar, typename Urbg>
JonesMatrix<Scalar> haar_unitary(Urbg& rng) {
    std::normal_distribution<Scalar> normal;
    Eigen::Matrix<Scalar, 4, 1> q(normal(rng), normal(rng), normal(rng), normal(rng));
    q.normalize();
    using C = std::complex<Scalar>;
    JonesMatrix<Scalar> u;
    u << C(q(0), q(1)), C(q(2), q(3)), C(-q(2), q(3)), C(q(0), -q(1));
    return u;
}

}  // namespace hom
