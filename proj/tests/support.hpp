#pragma once

#include <complex>
#include <random>

#include "hom/polarization.hpp"
#include "hom/random.hpp"

namespace hom::testing {

inline JonesVectord random_field(Rng& rng, std::normal_distribution<double>& n) {
    const std::complex<double> h(n(rng), n(rng));
    const std::complex<double> v(n(rng), n(rng));
    return {h, v};
}

/// Uniform on the Poincare sphere.
inline JonesVectord random_sop(Rng& rng) {
    std::normal_distribution<double> n;
    return normalized(random_field(rng, n));
}

}  // namespace hom::testing
