#include "hom/fock_oracle.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "hom/errors.hpp"

namespace hom {

namespace {

using Complex = std::complex<double>;
using Amplitudes = Eigen::VectorXcd;
using OutputAmplitudes = Eigen::MatrixXcd;

constexpr double truncation_limit = 1e-9;

double log_factorial(int n) { return std::lgamma(n + 1.0); }

Amplitudes coherent_amplitudes(Complex alpha, int n_max) {
    Amplitudes c(n_max + 1);
    const double mu = std::norm(alpha);
    for (int n = 0; n <= n_max; ++n) {
        // exp(-mu/2) alpha^n / sqrt(n!)
        const double mag = std::exp(-0.5 * mu + (n > 0 ? n * std::log(std::abs(alpha)) : 0.0) -
                                    0.5 * log_factorial(n));
        c(n) = (n == 0 || std::abs(alpha) > 0.0) ? std::polar(mag, n * std::arg(alpha)) : Complex(0.0);
    }
    return c;
}

// Output amplitudes psi(k, l) on (c, d) for input amplitudes c1 (port 1) x c2 (port 2),
// using a1^dag -> (c^dag + d^dag)/sqrt2 and a2^dag -> (c^dag - d^dag)/sqrt2.
OutputAmplitudes beamsplit(const Amplitudes& in1, const Amplitudes& in2) {
    const int n_max = static_cast<int>(in1.size()) - 1;
    OutputAmplitudes out = OutputAmplitudes::Zero(2 * n_max + 1, 2 * n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        if (in1(n) == Complex(0.0)) continue;
        for (int m = 0; m <= n_max; ++m) {
            const Complex amp = in1(n) * in2(m);
            if (amp == Complex(0.0)) continue;
            const double log_prefactor =
                -0.5 * (n + m) * std::log(2.0) - 0.5 * (log_factorial(n) + log_factorial(m));
            for (int j = 0; j <= n; ++j) {
                for (int i = 0; i <= m; ++i) {
                    const int k = j + i;
                    const int l = n + m - k;
                    const double log_binom = log_factorial(n) - log_factorial(j) - log_factorial(n - j) +
                                             log_factorial(m) - log_factorial(i) - log_factorial(m - i);
                    const double mag = std::exp(log_prefactor + log_binom +
                                                0.5 * (log_factorial(k) + log_factorial(l)));
                    const double sign = ((m - i) % 2 == 0) ? 1.0 : -1.0;
                    out(k, l) += amp * (sign * mag);
                }
            }
        }
    }
    return out;
}

struct VacuumProbabilities {
    double c_empty = 0.0;
    double d_empty = 0.0;
    double both_empty = 0.0;
};

VacuumProbabilities vacuum_probabilities(const OutputAmplitudes& psi) {
    const Eigen::MatrixXd p = psi.cwiseAbs2();
    return {p.row(0).sum(), p.col(0).sum(), p(0, 0)};
}

}  // namespace

double poisson_tail(double mu, int n_max) {
    require_domain(mu >= 0.0 && n_max >= 0, "poisson_tail: bad arguments");
    if (mu == 0.0) return 0.0;
    double tail = 0.0;
    for (int n = n_max + 1; n <= n_max + 400; ++n) {
        const double term = std::exp(-mu + n * std::log(mu) - log_factorial(n));
        tail += term;
        if (n > mu && term < 1e-18 * tail) break;
    }
    return tail;
}

FockCoincidence fock_coincidence_probabilities(double mu1, double mu2, double eta, int n_max) {
    require_domain(mu1 >= 0.0 && mu2 >= 0.0, "fock oracle: mu must be >= 0");
    require_domain(eta >= 0.0 && eta <= 1.0, "fock oracle: eta outside [0,1]");
    require_domain(n_max >= 2, "fock oracle: n_max must be >= 2");
    require_domain(poisson_tail(mu1, n_max) < truncation_limit &&
                       poisson_tail(mu2, n_max) < truncation_limit,
                   "fock oracle: photon-number truncation weight exceeds 1e-9; raise n_max");

    const Amplitudes vacuum = coherent_amplitudes(0.0, n_max);
    const double a1 = std::sqrt(mu1);
    const double a2 = std::sqrt(mu2);

    // Submode B carries no interference and no dependence on the phase.
    const VacuumProbabilities b = vacuum_probabilities(
        beamsplit(vacuum, coherent_amplitudes(std::sqrt(1.0 - eta) * a2, n_max)));

    // Quadrature over the relative phase; exact for the truncated trigonometric polynomial.
    const int phases = 8 * n_max + 8;
    FockCoincidence acc;
    for (int q = 0; q < phases; ++q) {
        const double phi = 2.0 * std::numbers::pi * q / phases;
        const VacuumProbabilities a = vacuum_probabilities(beamsplit(
            coherent_amplitudes(a1, n_max), coherent_amplitudes(std::polar(std::sqrt(eta) * a2, phi), n_max)));
        const double c_empty = a.c_empty * b.c_empty;
        const double d_empty = a.d_empty * b.d_empty;
        const double both_empty = a.both_empty * b.both_empty;
        acc.joint += 1.0 - c_empty - d_empty + both_empty;
        acc.first_port += 1.0 - c_empty;
        acc.second_port += 1.0 - d_empty;
    }
    acc.joint /= phases;
    acc.first_port /= phases;
    acc.second_port /= phases;
    return acc;
}

double fock_oracle_coincidence(double mu1, double mu2, double eta, int n_max) {
    require_domain(mu1 + mu2 > 0.0, "fock oracle: both sources off");
    const double indistinguishable = fock_coincidence_probabilities(mu1, mu2, eta, n_max).joint;
    const double distinguishable = fock_coincidence_probabilities(mu1, mu2, 0.0, n_max).joint;
    require_domain(distinguishable > 0.0, "fock oracle: zero coincidence probability");
    return indistinguishable / distinguishable;
}

}  // namespace hom
