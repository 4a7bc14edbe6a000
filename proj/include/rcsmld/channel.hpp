#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "rcsmld/numerics.hpp"

namespace rcsmld {

using Rng = std::mt19937_64;

/// Counter-based seed derivation: a SplitMix64 chain over (master, a, b).
/// Trial streams depend only on their coordinates, never on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept;

struct AntennaSetup {
    int n_tx = 4;
    int n_rx = 4;
    int n_layers = 4;
};

struct ImpairmentConfig {
    double evm_fraction = 0.0;  ///< e.g. 0.06 for 6% Tx EVM
    double sigma_ce_sq = 0.0;   ///< channel-estimation error variance per entry
    double alpha_tx = 0.0;      ///< transmit correlation coefficient
    double beta_rx = 0.0;       ///< receive correlation coefficient

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct ChannelRealization {
    CMatrix h_true;
    CMatrix h_est;
    double n0 = 1.0;
    double sigma_ce_sq = 0.0;
};

/// Antenna correlation matrix with entries c^{(|i-j|/(n-1))^2}; for four
/// antennas the off-diagonal exponents are 1/9, 4/9 and 1.
CMatrix correlation_matrix(int n, double c);

/// Hermitian square root S of a positive semidefinite R (S S^H = R).
CMatrix hermitian_sqrt(const CMatrix& r);

/// CN(0, variance) sample.
cdouble complex_gaussian(Rng& rng, double variance);

/// Block Rayleigh fading: H_true = R_rx^{1/2} H_w R_tx^{1/2} restricted to the
/// first n_layers transmit ports, H_est = H_true + E with E ~ CN(0, sigma_ce_sq).
ChannelRealization generate_channel(Rng& rng, const AntennaSetup& setup, const ImpairmentConfig& impairments,
                                    double n0);

/// y = H (x + e_evm) + w with e_evm ~ CN(0, evm^2) (unit-energy symbols) and w ~ CN(0, N0).
CVector transmit(Rng& rng, const CMatrix& h_true, std::span<const cdouble> x, double n0, double evm_fraction);

}  // namespace rcsmld
