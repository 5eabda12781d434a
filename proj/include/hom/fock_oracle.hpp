#pragma once

// Brute-force Fock-space reference for two phase-randomized coherent states
// meeting on a 50/50 beamsplitter and detected by ideal threshold detectors.
//
// Each input port carries two orthogonal submodes (A, B). Source 1 occupies
// 1A; source 2 is split sqrt(eta) into 2A and sqrt(1 - eta) into 2B, so eta
// is the mode overlap of the two sources. Both coherent states are expanded in
// the number basis up to n_max photons per mode, every Fock term is pushed
// through the exact beamsplitter transformation, and the result is averaged
// over the relative phase. Detector losses are not modeled: a lossy coherent
// state is again coherent, so efficiency can be folded into mu.

namespace hom {

struct FockCoincidence {
    double joint = 0.0;        ///< P(>=1 photon in both output ports)
    double first_port = 0.0;   ///< P(>=1 photon in output c)
    double second_port = 0.0;  ///< P(>=1 photon in output d)
};

/// Probability mass of a Poisson(mu) distribution above n_max.
double poisson_tail(double mu, int n_max);

FockCoincidence fock_coincidence_probabilities(double mu1, double mu2, double eta, int n_max);

/// Coincidence ratio C_ind/C_dist: joint click probability at overlap eta
/// divided by the one at eta = 0 for the same mean photon numbers.
double fock_oracle_coincidence(double mu1, double mu2, double eta, int n_max = 12);

}  // namespace hom
